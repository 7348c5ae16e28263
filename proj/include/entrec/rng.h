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

#ifndef ENTREC_RNG_H_
#define ENTREC_RNG_H_

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace entrec {

// Portable seeded generator. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; every derived draw below is computed
// here rather than through <random> distributions, whose algorithms are
// implementation-defined.
class SeededRng {
 public:
  static constexpr const char *kAlgorithm = "mt19937_64";

  explicit SeededRng(uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t Next() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Unbiased integer in [0, n). n must be > 0.
  uint64_t UniformInt(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = Next();
    } while (x >= limit);
    return x % n;
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Textual engine state; restoring it resumes the exact stream.
  std::string SaveState() const;
  void RestoreState(uint64_t seed, const std::string &state);

  bool operator==(const SeededRng &other) const {
    return seed_ == other.seed_ && engine_ == other.engine_;
  }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

// In-place Fisher-Yates permutation driven by `rng`.
template <typename T>
void Shuffle(std::vector<T> &items, SeededRng &rng) {
  for (size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.UniformInt(i)]);
  }
}

}  // namespace entrec

#endif  // ENTREC_RNG_H_
