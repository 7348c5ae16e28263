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

#ifndef ENTREC_GRADCHECK_H_
#define ENTREC_GRADCHECK_H_

#include <functional>
#include <span>
#include <vector>

namespace entrec {

// One block of parameters to perturb in place, with the analytic gradient the
// caller computed for it.
struct GradCheckBlock {
  std::span<double> values;
  std::span<const double> analytic;
};

// Relative errors are |a - n| / max(|a|, |n|, kGradCheckFloor). The floor keeps
// coordinates whose true gradient is zero from being judged on rounding noise;
// central differences at eps = 1e-5 carry about 1e-10 of it for O(1) losses.
inline constexpr double kGradCheckFloor = 1e-5;

// Compares central differences of `loss` against the analytic gradients and
// returns the maximum relative error over all coordinates. Throws
// NonFiniteLoss if the loss is not finite at any evaluated point.
double GradCheck(const std::function<double()> &loss,
                 std::span<const GradCheckBlock> blocks, double eps = 1e-5);

}  // namespace entrec

#endif  // ENTREC_GRADCHECK_H_
