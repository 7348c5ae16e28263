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

#ifndef ENTREC_BASE_ENCODER_H_
#define ENTREC_BASE_ENCODER_H_

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "entrec/encoder.h"

namespace entrec {

struct BaseEncoderConfig {
  size_t vocab_size = 0;
  size_t embed_dim = 128;
  // Fully connected widths are (4, 2, 1) x embed_dim: 512-256-128 at the
  // default dimension.
  size_t hidden1 = 512;
  size_t hidden2 = 256;
  bool use_ngrams = true;
  uint32_t num_buckets = kDefaultNgramBuckets;
  double bn_epsilon = 1e-5;
  double bn_momentum = 0.99;

  static BaseEncoderConfig ForDim(size_t vocab_size, size_t embed_dim,
                                  bool use_ngrams, uint32_t num_buckets);
};

struct BatchNormParams {
  MatrixD scale;          // 1 x width
  MatrixD shift;          // 1 x width
  MatrixD running_mean;   // 1 x width, not trained
  MatrixD running_var;    // 1 x width, not trained
};

struct DenseLayerParams {
  MatrixD weight;  // out x in
  MatrixD bias;    // 1 x out
  BatchNormParams bn;
};

// Averaged word/ngram embeddings followed by three Linear -> BatchNorm -> tanh
// layers.
class BaseEncoder final : public QueryEncoder {
 public:
  static constexpr size_t kLayers = 3;

  // Parameters are zero-filled (batch-norm scale 1, running var 1).
  explicit BaseEncoder(const BaseEncoderConfig &config);

  void Initialize(SeededRng &rng);

  EncoderKind kind() const override { return EncoderKind::kBase; }
  size_t output_dim() const override { return config_.embed_dim; }

  std::vector<double> Encode(const TokenizedQuery &query) const override;
  std::unique_ptr<ForwardCache> Forward(
      std::span<const TokenizedQuery *const> batch, Mode mode,
      MatrixD &out) const override;
  void Backward(const ForwardCache &cache, const MatrixD &d_out,
                GradientBuffer &grads) const override;
  void CommitTrainStatistics(const ForwardCache &cache) override;
  std::vector<TensorRef> Tensors() override;

  // [mean word embedding over basic+semantic tokens || mean ngram embedding].
  // Throws EmptyQuery if the query has no basic tokens.
  std::vector<double> EmbedAverage(const TokenizedQuery &query) const;

  const BaseEncoderConfig &config() const { return config_; }
  MatrixD &word_emb() { return word_emb_; }
  MatrixD &ngram_emb() { return ngram_emb_; }
  const MatrixD &word_emb() const { return word_emb_; }
  const MatrixD &ngram_emb() const { return ngram_emb_; }
  DenseLayerParams &layer(size_t i) { return layers_[i]; }
  const DenseLayerParams &layer(size_t i) const { return layers_[i]; }

  // Running statistics are not in Tensors() but are part of the model state.
  std::vector<MatrixD *> RunningStats();

  static constexpr size_t kWordEmbTensor = 0;
  static constexpr size_t kNgramEmbTensor = 1;

 private:
  BaseEncoderConfig config_;
  MatrixD word_emb_;
  MatrixD ngram_emb_;
  std::array<DenseLayerParams, kLayers> layers_;
};

}  // namespace entrec

#endif  // ENTREC_BASE_ENCODER_H_
