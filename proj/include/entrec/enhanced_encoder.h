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

#ifndef ENTREC_ENHANCED_ENCODER_H_
#define ENTREC_ENHANCED_ENCODER_H_

#include <memory>
#include <span>
#include <vector>

#include "entrec/encoder.h"

namespace entrec {

struct EnhancedEncoderConfig {
  size_t vocab_size = 0;
  size_t embed_dim = 128;   // d: word embedding and output dimension
  size_t hidden = 128;      // m: LSTM units per direction
  size_t attention = 64;    // k: attention hidden size
  double forget_bias = 1.0;
};

// One LSTM direction. Gate blocks are stacked in the order input, forget,
// cell candidate, output.
struct LstmCellParams {
  MatrixD input_weight;      // 4m x d
  MatrixD recurrent_weight;  // 4m x m
  MatrixD bias;              // 1 x 4m
};

struct BiLstmParams {
  LstmCellParams forward;
  LstmCellParams backward;

  size_t hidden() const { return forward.recurrent_weight.cols(); }
};

struct AttentionParams {
  MatrixD weight;  // k x 2m
  MatrixD score;   // 1 x k
  MatrixD bias;    // 1 x k
};

// Per-step LSTM activations, enough to run backpropagation through time.
struct LstmTrace {
  MatrixD gates;   // n x 4m, post-nonlinearity (i, f, g, o)
  MatrixD cell;    // n x m
  MatrixD hidden;  // n x m
};

// Runs both directions from zero state. Row i of the result is
// [forward h_i || backward h_i]. Throws EmptySequence for n == 0. When traces
// are given they receive the per-direction activations, indexed by position.
MatrixD BiLstmForward(const BiLstmParams &params, const MatrixD &inputs,
                      LstmTrace *forward_trace = nullptr,
                      LstmTrace *backward_trace = nullptr);

// softmax(U tanh(W H^T + b)) over the n rows of H.
std::vector<double> AttentionWeights(const AttentionParams &params,
                                     const MatrixD &states,
                                     MatrixD *hidden_out = nullptr);

// proj * sum_i alpha_i h_i. Throws DimensionMismatch if |alpha| != rows(H).
std::vector<double> PoolAndProject(const MatrixD &states,
                                   std::span<const double> alpha,
                                   const MatrixD &projection);

struct EncodedStates {
  MatrixD states;              // H, n x 2m
  std::vector<double> alpha;   // n
  std::vector<double> pooled;  // 2m
  std::vector<double> query;   // d
};

// BiLSTM over basic-token embeddings, self-attention pooling, and a linear
// projection to the entity embedding dimension.
class EnhancedEncoder final : public QueryEncoder {
 public:
  explicit EnhancedEncoder(const EnhancedEncoderConfig &config);

  void Initialize(SeededRng &rng);

  EncoderKind kind() const override { return EncoderKind::kEnhanced; }
  size_t output_dim() const override { return config_.embed_dim; }

  std::vector<double> Encode(const TokenizedQuery &query) const override;
  std::unique_ptr<ForwardCache> Forward(
      std::span<const TokenizedQuery *const> batch, Mode mode,
      MatrixD &out) const override;
  void Backward(const ForwardCache &cache, const MatrixD &d_out,
                GradientBuffer &grads) const override;
  std::vector<TensorRef> Tensors() override;

  // Full intermediate state for one query (attention dumps, tests).
  EncodedStates EncodeStates(const TokenizedQuery &query) const;

  const EnhancedEncoderConfig &config() const { return config_; }
  MatrixD &word_emb() { return word_emb_; }
  const MatrixD &word_emb() const { return word_emb_; }
  BiLstmParams &lstm() { return lstm_; }
  const BiLstmParams &lstm() const { return lstm_; }
  AttentionParams &attention() { return attention_; }
  const AttentionParams &attention() const { return attention_; }
  MatrixD &projection() { return projection_; }
  const MatrixD &projection() const { return projection_; }

  static constexpr size_t kWordEmbTensor = 0;

 private:
  MatrixD Embed(const TokenizedQuery &query) const;

  EnhancedEncoderConfig config_;
  MatrixD word_emb_;
  BiLstmParams lstm_;
  AttentionParams attention_;
  MatrixD projection_;  // d x 2m
};

}  // namespace entrec

#endif  // ENTREC_ENHANCED_ENCODER_H_
