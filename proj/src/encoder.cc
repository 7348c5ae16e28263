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

#include "entrec/encoder.h"

#include <algorithm>

#include "entrec/errors.h"

namespace entrec {

std::string_view EncoderKindName(EncoderKind kind) {
  return kind == EncoderKind::kBase ? "base" : "enhanced";
}

EncoderKind ParseEncoderKind(std::string_view name) {
  if (name == "base") return EncoderKind::kBase;
  if (name == "enhanced") return EncoderKind::kEnhanced;
  throw Error(ErrorCode::kConfigInvalid,
              "unknown encoder kind '" + std::string(name) + "'");
}

GradientBuffer::GradientBuffer(std::span<const TensorRef> tensors) {
  for (const TensorRef &t : tensors) {
    grads_.emplace_back(t.value->rows(), t.value->cols());
    row_sparse_.push_back(t.row_sparse);
    touched_.emplace_back();
  }
}

void GradientBuffer::TouchRow(size_t tensor, size_t row) {
  touched_[tensor].push_back(static_cast<uint32_t>(row));
}

std::vector<uint32_t> GradientBuffer::TouchedRows(size_t tensor) const {
  std::vector<uint32_t> rows = touched_[tensor];
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

void GradientBuffer::Clear() {
  for (size_t i = 0; i < grads_.size(); ++i) {
    if (row_sparse_[i]) {
      for (uint32_t r : touched_[i]) {
        auto row = grads_[i].row(r);
        std::fill(row.begin(), row.end(), 0.0);
      }
      touched_[i].clear();
    } else {
      grads_[i].Fill(0.0);
    }
  }
}

void InitUniform(MatrixD &m, double bound, SeededRng &rng) {
  for (double &v : m.values()) v = rng.Uniform(-bound, bound);
}

void QueryEncoder::CheckCache(const ForwardCache &cache,
                              const MatrixD &d_out) const {
  if (cache.params_version != version_) {
    throw Error(ErrorCode::kStaleActivationCache,
                "parameters changed since the forward pass");
  }
  if (cache.batch_size != d_out.rows() || d_out.cols() != output_dim()) {
    throw Error(ErrorCode::kStaleActivationCache,
                "upstream gradient does not match the cached batch");
  }
}

}  // namespace entrec
