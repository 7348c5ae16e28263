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

#ifndef ENTREC_ENCODER_H_
#define ENTREC_ENCODER_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "entrec/matrix.h"
#include "entrec/rng.h"
#include "entrec/vocab.h"

namespace entrec {

enum class EncoderKind : uint32_t { kBase = 0, kEnhanced = 1 };

std::string_view EncoderKindName(EncoderKind kind);
EncoderKind ParseEncoderKind(std::string_view name);

// A named trainable tensor. Row-sparse tensors (embedding tables) only
// receive gradients, and optimizer updates, on rows a batch touched.
struct TensorRef {
  std::string name;
  MatrixD *value = nullptr;
  bool row_sparse = false;
};

// Gradient storage shaped like a tensor list. Dense tensors are zeroed in
// full by Clear(); row-sparse tensors only on the rows recorded by TouchRow.
class GradientBuffer {
 public:
  GradientBuffer() = default;
  explicit GradientBuffer(std::span<const TensorRef> tensors);

  size_t size() const { return grads_.size(); }
  MatrixD &operator[](size_t i) { return grads_[i]; }
  const MatrixD &operator[](size_t i) const { return grads_[i]; }
  bool row_sparse(size_t i) const { return row_sparse_[i]; }

  void TouchRow(size_t tensor, size_t row);
  // Sorted, de-duplicated touched rows of a row-sparse tensor.
  std::vector<uint32_t> TouchedRows(size_t tensor) const;

  void Clear();

 private:
  std::vector<MatrixD> grads_;
  std::vector<bool> row_sparse_;
  std::vector<std::vector<uint32_t>> touched_;
};

// Uniform(-bound, bound) initialization in place.
void InitUniform(MatrixD &m, double bound, SeededRng &rng);

// Activations kept by a training forward pass for the matching backward pass.
class ForwardCache {
 public:
  virtual ~ForwardCache() = default;
  uint64_t params_version = 0;
  size_t batch_size = 0;
};

enum class Mode { kTrain, kInfer };

// A query tower mapping tokenized text to an embedding compatible with the
// entity table.
class QueryEncoder {
 public:
  virtual ~QueryEncoder() = default;

  virtual EncoderKind kind() const = 0;
  virtual size_t output_dim() const = 0;

  // Inference-mode embedding of one query. Pure given the parameters, so it
  // may be called concurrently.
  virtual std::vector<double> Encode(const TokenizedQuery &query) const = 0;

  // Forward pass over a batch; writes one output row per query into `out`
  // and returns the cache needed by Backward.
  virtual std::unique_ptr<ForwardCache> Forward(
      std::span<const TokenizedQuery *const> batch, Mode mode,
      MatrixD &out) const = 0;

  // Accumulates parameter gradients for upstream gradient `d_out` (one row
  // per batch element). Throws StaleActivationCache if parameters changed
  // since the forward pass or the batch shape differs.
  virtual void Backward(const ForwardCache &cache, const MatrixD &d_out,
                        GradientBuffer &grads) const = 0;

  // Called once per training step after Forward, before parameters change.
  virtual void CommitTrainStatistics(const ForwardCache &) {}

  virtual std::vector<TensorRef> Tensors() = 0;

  uint64_t version() const { return version_; }
  void BumpVersion() { ++version_; }

 protected:
  void CheckCache(const ForwardCache &cache, const MatrixD &d_out) const;

 private:
  uint64_t version_ = 0;
};

}  // namespace entrec

#endif  // ENTREC_ENCODER_H_
