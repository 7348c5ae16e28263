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

#ifndef ENTREC_SAMPLER_H_
#define ENTREC_SAMPLER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "entrec/rng.h"

namespace entrec {

enum class SamplerKind {
  // P(r) = log((r + 2) / (r + 1)) / log(|V| + 1); entity ids are frequency
  // ranks, so id == r.
  kLogUniform,
  // P(j) proportional to freq(j)^0.75.
  kUnigram,
  // Every entity except the target, once each (a full softmax).
  kExhaustive,
};

std::string_view SamplerKindName(SamplerKind kind);
SamplerKind ParseSamplerKind(std::string_view name);

struct NegativeSample {
  std::vector<int32_t> ids;
  // Proposal probability of each id, conditioned on the excluded target.
  std::vector<double> probs;
};

class NegativeSampler {
 public:
  // `freqs` is required for kUnigram. Throws VocabTooSmall if
  // entity_count <= 1.
  NegativeSampler(SamplerKind kind, size_t entity_count,
                  std::span<const int64_t> freqs = {});

  SamplerKind kind() const { return kind_; }
  size_t entity_count() const { return entity_count_; }

  // Unconditional proposal probability of an id.
  double Probability(int32_t id) const;

  // k draws with replacement, rejecting `exclude`. kExhaustive ignores k and
  // returns all other ids in ascending order.
  NegativeSample Sample(SeededRng &rng, size_t k,
                        std::optional<int32_t> exclude) const;

 private:
  int32_t Draw(SeededRng &rng) const;

  SamplerKind kind_;
  size_t entity_count_;
  std::vector<double> cumulative_;  // kUnigram
  std::vector<double> probs_;
};

}  // namespace entrec

#endif  // ENTREC_SAMPLER_H_
