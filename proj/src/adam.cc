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

#include "entrec/adam.h"

#include <cmath>

namespace entrec {

Adam::Adam(std::span<const TensorRef> tensors, const AdamConfig &config)
    : config_(config) {
  for (const TensorRef &t : tensors) {
    first_.emplace_back(t.value->rows(), t.value->cols());
    second_.emplace_back(t.value->rows(), t.value->cols());
  }
}

void Adam::UpdateRange(double *param, const double *grad, double *m, double *v,
                       size_t n, double step_size, double bias2) const {
  for (size_t i = 0; i < n; ++i) {
    m[i] = config_.beta1 * m[i] + (1 - config_.beta1) * grad[i];
    v[i] = config_.beta2 * v[i] + (1 - config_.beta2) * grad[i] * grad[i];
    param[i] -= step_size * m[i] / (std::sqrt(v[i] / bias2) + config_.epsilon);
  }
}

void Adam::Step(std::span<const TensorRef> tensors, const GradientBuffer &grads) {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double bias1 = 1 - std::pow(config_.beta1, t);
  const double bias2 = 1 - std::pow(config_.beta2, t);
  const double step_size = config_.learning_rate / bias1;
  for (size_t i = 0; i < tensors.size(); ++i) {
    MatrixD &param = *tensors[i].value;
    const MatrixD &grad = grads[i];
    if (grads.row_sparse(i)) {
      const size_t cols = param.cols();
      for (uint32_t r : grads.TouchedRows(i)) {
        UpdateRange(param.row(r).data(), grad.row(r).data(), first_[i].row(r).data(),
                    second_[i].row(r).data(), cols, step_size, bias2);
      }
    } else {
      UpdateRange(param.data(), grad.data(), first_[i].data(), second_[i].data(),
                  param.size(), step_size, bias2);
    }
  }
}

}  // namespace entrec
