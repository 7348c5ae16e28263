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

#ifndef ENTREC_SAMPLED_SOFTMAX_H_
#define ENTREC_SAMPLED_SOFTMAX_H_

#include <cstdint>
#include <span>
#include <vector>

#include "entrec/matrix.h"
#include "entrec/sampler.h"

namespace entrec {

struct SampledSoftmaxResult {
  double loss = 0;
  std::vector<double> d_query;
  // Class list in logit order: the target first, then each negative draw
  // (duplicates kept). d_rows(i) is the gradient for table row rows[i].
  std::vector<int32_t> rows;
  MatrixD d_rows;
};

// Cross-entropy of the target against its sampled negatives. Logits are
// u_j . q; when `correct` is set each negative's logit is reduced by
// log(k * Q(j)). Throws TargetInNegatives if the target was sampled.
SampledSoftmaxResult SampledSoftmaxLoss(std::span<const double> query,
                                        int32_t target,
                                        const NegativeSample &negatives,
                                        const MatrixD &table, bool correct);

// -log softmax(U q)[target] over every row of the table.
double FullSoftmaxLoss(std::span<const double> query, int32_t target,
                       const MatrixD &table);

}  // namespace entrec

#endif  // ENTREC_SAMPLED_SOFTMAX_H_
