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

#include "entrec/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "entrec/errors.h"

namespace entrec {
namespace {

double Evaluate(const std::function<double()> &loss) {
  const double value = loss();
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kNonFiniteLoss, "loss is not finite during gradient check");
  }
  return value;
}

}  // namespace

double GradCheck(const std::function<double()> &loss,
                 std::span<const GradCheckBlock> blocks, double eps) {
  Evaluate(loss);
  double max_error = 0;
  for (const GradCheckBlock &block : blocks) {
    for (size_t i = 0; i < block.values.size(); ++i) {
      double &p = block.values[i];
      const double saved = p;
      p = saved + eps;
      const double plus = Evaluate(loss);
      p = saved - eps;
      const double minus = Evaluate(loss);
      p = saved;
      const double numeric = (plus - minus) / (2 * eps);
      const double analytic = block.analytic[i];
      const double scale =
          std::max({std::abs(numeric), std::abs(analytic), kGradCheckFloor});
      max_error = std::max(max_error, std::abs(numeric - analytic) / scale);
    }
  }
  return max_error;
}

}  // namespace entrec
