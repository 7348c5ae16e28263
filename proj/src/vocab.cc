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

#include "entrec/vocab.h"

#include <algorithm>
#include <fstream>
#include <map>

#include "entrec/errors.h"
#include "entrec/hash.h"

namespace entrec {
namespace {

std::vector<std::pair<std::string, int64_t>> RankByFrequency(
    const std::map<std::string, int64_t> &counts, int64_t min_count) {
  std::vector<std::pair<std::string, int64_t>> ranked;
  for (const auto &[key, count] : counts) {
    if (count >= min_count) ranked.emplace_back(key, count);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  return ranked;
}

}  // namespace

Vocabulary::Vocabulary() {
  AddWord(kPadToken, 0);
  AddWord(kUnkToken, 0);
}

int32_t Vocabulary::AddWord(const std::string &word, int64_t freq) {
  auto [it, inserted] =
      word_to_id_.emplace(word, static_cast<int32_t>(words_.size()));
  if (!inserted) throw Error(ErrorCode::kBadFormat, "duplicate word: " + word);
  words_.push_back(word);
  word_freq_.push_back(freq);
  return it->second;
}

int32_t Vocabulary::AddEntity(const std::string &name, int64_t freq) {
  auto [it, inserted] =
      entity_to_id_.emplace(name, static_cast<int32_t>(entities_.size()));
  if (!inserted) throw Error(ErrorCode::kBadFormat, "duplicate entity: " + name);
  entities_.push_back(name);
  entity_freq_.push_back(freq);
  return it->second;
}

int32_t Vocabulary::WordId(std::string_view word) const {
  auto it = word_to_id_.find(std::string(word));
  return it == word_to_id_.end() ? kUnk : it->second;
}

std::optional<int32_t> Vocabulary::EntityId(std::string_view name) const {
  auto it = entity_to_id_.find(std::string(name));
  if (it == entity_to_id_.end()) return std::nullopt;
  return it->second;
}

nlohmann::json Vocabulary::ToJson() const {
  nlohmann::json words = nlohmann::json::array();
  for (size_t i = 0; i < words_.size(); ++i) {
    words.push_back({words_[i], i, word_freq_[i]});
  }
  nlohmann::json entities = nlohmann::json::array();
  for (size_t i = 0; i < entities_.size(); ++i) {
    entities.push_back({entities_[i], i, entity_freq_[i]});
  }
  return {{"words", std::move(words)}, {"entities", std::move(entities)}};
}

Vocabulary Vocabulary::FromJson(const nlohmann::json &j) {
  Vocabulary vocab;
  vocab.words_.clear();
  vocab.word_freq_.clear();
  vocab.word_to_id_.clear();
  try {
    for (const auto &list : {std::string("words"), std::string("entities")}) {
      const auto &items = j.at(list);
      for (size_t i = 0; i < items.size(); ++i) {
        const auto &item = items[i];
        if (item.at(1).get<size_t>() != i) {
          throw Error(ErrorCode::kBadFormat, "vocabulary ids must be dense and ordered");
        }
        const auto name = item.at(0).get<std::string>();
        const auto freq = item.at(2).get<int64_t>();
        if (list == "words") {
          vocab.AddWord(name, freq);
        } else {
          vocab.AddEntity(name, freq);
        }
      }
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kBadFormat, std::string("vocabulary json: ") + e.what());
  }
  if (vocab.word_count() < 2 || vocab.Word(kPad) != kPadToken ||
      vocab.Word(kUnk) != kUnkToken) {
    throw Error(ErrorCode::kBadFormat, "vocabulary lacks reserved PAD/UNK ids");
  }
  return vocab;
}

void Vocabulary::Save(const std::string &path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << ToJson().dump() << '\n';
}

Vocabulary Vocabulary::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInputMissing, "cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kBadFormat, path + ": " + e.what());
  }
  return FromJson(j);
}

uint64_t Vocabulary::Hash() const { return Fnv1a64(ToJson().dump()); }

Vocabulary BuildVocab(std::span<const QueryEntityRecord> records,
                      const Segmenter &segmenter, int64_t min_count,
                      bool pretokenized) {
  if (records.empty()) throw Error(ErrorCode::kEmptyCorpus, "no training records");
  std::map<std::string, int64_t> word_counts;
  std::map<std::string, int64_t> entity_counts;
  for (const QueryEntityRecord &record : records) {
    ++entity_counts[record.entity];
    Segmentation seg;
    try {
      seg = pretokenized ? segmenter.SegmentPretokenized(record.query)
                         : segmenter.Segment(record.query);
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kEmptyQuery) continue;
      throw;
    }
    for (const std::string &token : seg.basic) ++word_counts[token];
    for (size_t i = 0; i < seg.semantic.size(); ++i) {
      if (seg.semantic_span[i] > 1) ++word_counts[seg.semantic[i]];
    }
  }
  Vocabulary vocab;
  for (const auto &[word, count] : RankByFrequency(word_counts, min_count)) {
    if (word == Vocabulary::kPadToken || word == Vocabulary::kUnkToken) continue;
    vocab.AddWord(word, count);
  }
  for (const auto &[entity, count] : RankByFrequency(entity_counts, min_count)) {
    vocab.AddEntity(entity, count);
  }
  return vocab;
}

TokenizedQuery Tokenizer::Tokenize(std::string_view text) const {
  Segmentation seg = options_.pretokenized ? segmenter_->SegmentPretokenized(text)
                                           : segmenter_->Segment(text);
  if (seg.basic.size() > options_.max_len) seg.basic.resize(options_.max_len);
  if (seg.semantic.size() > options_.max_len) seg.semantic.resize(options_.max_len);
  TokenizedQuery q;
  q.raw = std::string(text);
  for (const std::string &t : seg.basic) q.basic_tokens.push_back(vocab_->WordId(t));
  for (const std::string &t : seg.semantic) {
    q.semantic_tokens.push_back(vocab_->WordId(t));
  }
  q.ngram_ids = ExtractNgrams(seg.basic, options_.ngram_orders, options_.num_buckets);
  q.basic_text = std::move(seg.basic);
  return q;
}

}  // namespace entrec
