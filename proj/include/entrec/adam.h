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

#ifndef ENTREC_ADAM_H_
#define ENTREC_ADAM_H_

#include <span>
#include <vector>

#include "entrec/encoder.h"

namespace entrec {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with lazy updates for row-sparse tensors: only rows touched in the
// current step move, using the global step count for bias correction.
class Adam {
 public:
  Adam(std::span<const TensorRef> tensors, const AdamConfig &config);

  void Step(std::span<const TensorRef> tensors, const GradientBuffer &grads);

  uint64_t steps() const { return steps_; }

 private:
  void UpdateRange(double *param, const double *grad, double *m, double *v,
                   size_t n, double step_size, double bias2) const;

  AdamConfig config_;
  uint64_t steps_ = 0;
  std::vector<MatrixD> first_;
  std::vector<MatrixD> second_;
};

}  // namespace entrec

#endif  // ENTREC_ADAM_H_
