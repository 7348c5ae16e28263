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

#include "entrec/sampler.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "entrec/errors.h"

namespace entrec {

std::string_view SamplerKindName(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kLogUniform: return "log_uniform";
    case SamplerKind::kUnigram: return "unigram";
    case SamplerKind::kExhaustive: return "exhaustive";
  }
  return "unknown";
}

SamplerKind ParseSamplerKind(std::string_view name) {
  if (name == "log_uniform") return SamplerKind::kLogUniform;
  if (name == "unigram") return SamplerKind::kUnigram;
  if (name == "exhaustive") return SamplerKind::kExhaustive;
  throw Error(ErrorCode::kConfigInvalid, "unknown sampler '" + std::string(name) + "'");
}

NegativeSampler::NegativeSampler(SamplerKind kind, size_t entity_count,
                                 std::span<const int64_t> freqs)
    : kind_(kind), entity_count_(entity_count) {
  if (entity_count <= 1) {
    throw Error(ErrorCode::kVocabTooSmall,
                "negative sampling needs at least two entities");
  }
  probs_.resize(entity_count);
  switch (kind) {
    case SamplerKind::kLogUniform: {
      const double norm = std::log(static_cast<double>(entity_count) + 1.0);
      for (size_t r = 0; r < entity_count; ++r) {
        probs_[r] = std::log((r + 2.0) / (r + 1.0)) / norm;
      }
      break;
    }
    case SamplerKind::kUnigram: {
      if (freqs.size() != entity_count) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "unigram sampler needs one frequency per entity");
      }
      double total = 0;
      for (size_t i = 0; i < entity_count; ++i) {
        probs_[i] = std::pow(static_cast<double>(std::max<int64_t>(freqs[i], 0)), 0.75);
        total += probs_[i];
      }
      if (total <= 0) {
        throw Error(ErrorCode::kConfigInvalid, "unigram sampler: all frequencies are zero");
      }
      cumulative_.resize(entity_count);
      double running = 0;
      for (size_t i = 0; i < entity_count; ++i) {
        probs_[i] /= total;
        running += probs_[i];
        cumulative_[i] = running;
      }
      break;
    }
    case SamplerKind::kExhaustive:
      std::fill(probs_.begin(), probs_.end(), 1.0 / static_cast<double>(entity_count));
      break;
  }
}

double NegativeSampler::Probability(int32_t id) const { return probs_[id]; }

int32_t NegativeSampler::Draw(SeededRng &rng) const {
  const double u = rng.Uniform();
  if (kind_ == SamplerKind::kLogUniform) {
    // Inverse CDF: P(rank < r) = log(r + 1) / log(|V| + 1).
    const double x = std::exp(u * std::log(static_cast<double>(entity_count_) + 1.0));
    const auto r = static_cast<int64_t>(std::floor(x)) - 1;
    return static_cast<int32_t>(
        std::clamp<int64_t>(r, 0, static_cast<int64_t>(entity_count_) - 1));
  }
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = std::min<size_t>(it - cumulative_.begin(), entity_count_ - 1);
  return static_cast<int32_t>(idx);
}

NegativeSample NegativeSampler::Sample(SeededRng &rng, size_t k,
                                       std::optional<int32_t> exclude) const {
  NegativeSample out;
  if (kind_ == SamplerKind::kExhaustive) {
    const double p = 1.0 / static_cast<double>(entity_count_ - (exclude ? 1 : 0));
    for (size_t i = 0; i < entity_count_; ++i) {
      if (exclude && static_cast<int32_t>(i) == *exclude) continue;
      out.ids.push_back(static_cast<int32_t>(i));
      out.probs.push_back(p);
    }
    return out;
  }
  const double kept_mass = exclude ? 1.0 - probs_[*exclude] : 1.0;
  out.ids.reserve(k);
  out.probs.reserve(k);
  while (out.ids.size() < k) {
    const int32_t id = Draw(rng);
    if (exclude && id == *exclude) continue;
    out.ids.push_back(id);
    out.probs.push_back(probs_[id] / kept_mass);
  }
  return out;
}

}  // namespace entrec
