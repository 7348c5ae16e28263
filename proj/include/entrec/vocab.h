// Copyright 2026 The Entrec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ENTREC_VOCAB_H_
#define ENTREC_VOCAB_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "entrec/text.h"

namespace entrec {

// Bidirectional token and entity id maps. Word ids 0 and 1 are reserved for
// padding and unknown tokens; entity ids start at 0.
class Vocabulary {
 public:
  static constexpr int32_t kPad = 0;
  static constexpr int32_t kUnk = 1;
  static constexpr const char *kPadToken = "<pad>";
  static constexpr const char *kUnkToken = "<unk>";

  Vocabulary();

  // Ids are handed out in call order; callers add in final id order.
  int32_t AddWord(const std::string &word, int64_t freq);
  int32_t AddEntity(const std::string &name, int64_t freq);

  // Unknown words map to kUnk.
  int32_t WordId(std::string_view word) const;
  std::optional<int32_t> EntityId(std::string_view name) const;

  const std::string &Word(int32_t id) const { return words_[id]; }
  const std::string &Entity(int32_t id) const { return entities_[id]; }
  int64_t WordFreq(int32_t id) const { return word_freq_[id]; }
  int64_t EntityFreq(int32_t id) const { return entity_freq_[id]; }
  const std::vector<std::string> &entities() const { return entities_; }
  const std::vector<int64_t> &entity_freqs() const { return entity_freq_; }

  size_t word_count() const { return words_.size(); }
  size_t entity_count() const { return entities_.size(); }

  // {"words": [[token, id, freq], ...], "entities": [[name, id, freq], ...]}
  nlohmann::json ToJson() const;
  static Vocabulary FromJson(const nlohmann::json &j);
  void Save(const std::string &path) const;
  static Vocabulary Load(const std::string &path);

  // Content hash over the JSON form.
  uint64_t Hash() const;

  bool operator==(const Vocabulary &other) const {
    return words_ == other.words_ && entities_ == other.entities_ &&
           word_freq_ == other.word_freq_ && entity_freq_ == other.entity_freq_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<int64_t> word_freq_;
  std::unordered_map<std::string, int32_t> word_to_id_;
  std::vector<std::string> entities_;
  std::vector<int64_t> entity_freq_;
  std::unordered_map<std::string, int32_t> entity_to_id_;
};

struct QueryEntityRecord {
  std::string query;
  std::string entity;
  double weight = 1.0;
};

// Counts basic tokens, merged semantic tokens and entities, keeps those with
// frequency >= min_count, and assigns ids by descending frequency with a
// lexicographic tie-break. The result does not depend on record order.
// Throws EmptyCorpus if there are no records.
Vocabulary BuildVocab(std::span<const QueryEntityRecord> records,
                      const Segmenter &segmenter, int64_t min_count,
                      bool pretokenized = false);

struct TokenizedQuery {
  std::string raw;
  std::vector<std::string> basic_text;
  std::vector<int32_t> basic_tokens;
  std::vector<int32_t> semantic_tokens;
  std::vector<uint32_t> ngram_ids;
};

struct TokenizerOptions {
  size_t max_len = kDefaultMaxLen;
  uint32_t num_buckets = kDefaultNgramBuckets;
  std::vector<int> ngram_orders = {2, 3};
  bool pretokenized = false;
};

// Text -> ids. Both token streams are truncated to max_len (tail dropped);
// ngrams are taken from the truncated basic stream.
class Tokenizer {
 public:
  Tokenizer(const Vocabulary &vocab, const Segmenter &segmenter,
            TokenizerOptions options = {})
      : vocab_(&vocab), segmenter_(&segmenter), options_(std::move(options)) {}

  TokenizedQuery Tokenize(std::string_view text) const;

  const TokenizerOptions &options() const { return options_; }
  const Vocabulary &vocab() const { return *vocab_; }

 private:
  const Vocabulary *vocab_;
  const Segmenter *segmenter_;
  TokenizerOptions options_;
};

}  // namespace entrec

#endif  // ENTREC_VOCAB_H_
