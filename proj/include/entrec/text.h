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

#ifndef ENTREC_TEXT_H_
#define ENTREC_TEXT_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace entrec {

// Splits UTF-8 text into basic-level tokens. Runs of letters/digits form one
// token (ASCII letters are lowercased); whitespace and punctuation separate
// tokens; every CJK ideograph or kana is a token of its own.
std::vector<std::string> SplitBasic(std::string_view text);

// True if the first code point of `token` is a per-character script.
bool StartsWithCjk(std::string_view token);
bool EndsWithCjk(std::string_view token);

// Joins the basic tokens of a phrase into one semantic token: pieces are
// glued directly at CJK boundaries and with '_' elsewhere
// ("cold","weather" -> "cold_weather", "天","气" -> "天气").
std::string JoinPhrase(std::span<const std::string> tokens);

// Greedy longest-match dictionary over basic-token sequences.
class PhraseMatcher {
 public:
  struct Match {
    size_t begin = 0;
    size_t length = 0;
    size_t phrase = 0;  // index into the constructor's phrase list
  };

  PhraseMatcher() = default;

  // Each phrase is split with SplitBasic. Phrases that split into fewer than
  // `min_tokens` tokens are ignored. Later duplicates keep the first index.
  explicit PhraseMatcher(std::span<const std::string> phrases,
                         size_t min_tokens = 1);

  // Non-overlapping matches, scanning left to right and taking the longest
  // phrase that starts at each position.
  std::vector<Match> FindAll(std::span<const std::string> tokens) const;

  size_t size() const { return lookup_.size(); }
  size_t max_tokens() const { return max_tokens_; }

 private:
  std::unordered_map<std::string, size_t> lookup_;
  size_t max_tokens_ = 0;
};

struct Segmentation {
  std::vector<std::string> basic;
  std::vector<std::string> semantic;
  // Number of basic tokens covered by each semantic token.
  std::vector<uint32_t> semantic_span;
};

// Two-level segmentation: basic tokens from SplitBasic, semantic tokens from
// merging dictionary phrases (multi-token entries only) in the basic stream.
class Segmenter {
 public:
  Segmenter() = default;
  explicit Segmenter(std::span<const std::string> phrases)
      : phrases_(phrases, 2) {}

  // Throws EmptyQuery if no token survives.
  Segmentation Segment(std::string_view text) const;

  // Whitespace-split input that is already tokenized; only phrase merging is
  // applied.
  Segmentation SegmentPretokenized(std::string_view text) const;

  size_t phrase_count() const { return phrases_.size(); }

 private:
  Segmentation Merge(std::vector<std::string> basic) const;

  PhraseMatcher phrases_;
};

// One bucket id per contiguous n-gram of each order, in token order, lower
// orders first. The id is Fnv1a64 of the n-gram's tokens joined by a single
// space, modulo num_buckets.
std::vector<uint32_t> ExtractNgrams(std::span<const std::string> tokens,
                                    std::span<const int> orders,
                                    uint32_t num_buckets);

inline constexpr int kDefaultNgramOrders[] = {2, 3};
inline constexpr uint32_t kDefaultNgramBuckets = 1u << 20;
inline constexpr size_t kDefaultMaxLen = 32;

}  // namespace entrec

#endif  // ENTREC_TEXT_H_
