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

#include "entrec/sampled_softmax.h"

#include <cmath>
#include <string>

#include "entrec/errors.h"

namespace entrec {

SampledSoftmaxResult SampledSoftmaxLoss(std::span<const double> query,
                                        int32_t target,
                                        const NegativeSample &negatives,
                                        const MatrixD &table, bool correct) {
  if (query.size() != table.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "query and entity table widths differ");
  }
  SampledSoftmaxResult result;
  result.rows.reserve(negatives.ids.size() + 1);
  result.rows.push_back(target);
  std::vector<double> logits;
  logits.reserve(negatives.ids.size() + 1);
  logits.push_back(Dot(table.row(target), query));
  const double k = static_cast<double>(negatives.ids.size());
  for (size_t i = 0; i < negatives.ids.size(); ++i) {
    const int32_t id = negatives.ids[i];
    if (id == target) {
      throw Error(ErrorCode::kTargetInNegatives,
                  "target " + std::to_string(target) + " among sampled negatives");
    }
    double logit = Dot(table.row(id), query);
    if (correct) logit -= std::log(k * negatives.probs[i]);
    result.rows.push_back(id);
    logits.push_back(logit);
  }
  const std::vector<double> probs = Softmax(logits);
  result.loss = LogSumExp(logits) - logits[0];
  result.d_query.assign(query.size(), 0.0);
  result.d_rows = MatrixD(result.rows.size(), query.size());
  for (size_t i = 0; i < result.rows.size(); ++i) {
    const double d_logit = probs[i] - (i == 0 ? 1.0 : 0.0);
    Axpy(d_logit, table.row(result.rows[i]), result.d_query);
    Axpy(d_logit, query, result.d_rows.row(i));
  }
  return result;
}

double FullSoftmaxLoss(std::span<const double> query, int32_t target,
                       const MatrixD &table) {
  std::vector<double> logits(table.rows());
  for (size_t j = 0; j < table.rows(); ++j) logits[j] = Dot(table.row(j), query);
  return LogSumExp(logits) - logits[target];
}

}  // namespace entrec
