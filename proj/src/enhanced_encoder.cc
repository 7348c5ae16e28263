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

#include "entrec/enhanced_encoder.h"

#include <cmath>

#include "entrec/errors.h"

namespace entrec {
namespace {

enum Tensor : size_t {
  kWordEmb = 0,
  kFwdInput,
  kFwdRecurrent,
  kFwdBias,
  kBwdInput,
  kBwdRecurrent,
  kBwdBias,
  kAttWeight,
  kAttScore,
  kAttBias,
  kProjection,
};

// Position visited at step s of a direction.
size_t Position(size_t step, size_t n, bool reverse) {
  return reverse ? n - 1 - step : step;
}

void RunDirection(const LstmCellParams &cell, const MatrixD &inputs,
                  bool reverse, LstmTrace &trace) {
  const size_t n = inputs.rows();
  const size_t m = cell.recurrent_weight.cols();
  trace.gates = MatrixD(n, 4 * m);
  trace.cell = MatrixD(n, m);
  trace.hidden = MatrixD(n, m);
  std::vector<double> h_prev(m, 0.0);
  std::vector<double> c_prev(m, 0.0);
  std::vector<double> a(4 * m);
  for (size_t s = 0; s < n; ++s) {
    const size_t t = Position(s, n, reverse);
    MatVec(cell.input_weight, inputs.row(t), std::span<double>(a));
    MatVecAdd(cell.recurrent_weight, std::span<const double>(h_prev),
              std::span<double>(a));
    Axpy(1.0, cell.bias.row(0), std::span<double>(a));
    auto gates = trace.gates.row(t);
    for (size_t j = 0; j < m; ++j) {
      const double i = Sigmoid(a[j]);
      const double f = Sigmoid(a[m + j]);
      const double g = std::tanh(a[2 * m + j]);
      const double o = Sigmoid(a[3 * m + j]);
      gates[j] = i;
      gates[m + j] = f;
      gates[2 * m + j] = g;
      gates[3 * m + j] = o;
      const double c = f * c_prev[j] + i * g;
      trace.cell(t, j) = c;
      trace.hidden(t, j) = o * std::tanh(c);
    }
    auto c_row = trace.cell.row(t);
    auto h_row = trace.hidden.row(t);
    c_prev.assign(c_row.begin(), c_row.end());
    h_prev.assign(h_row.begin(), h_row.end());
  }
}

// Backpropagation through time for one direction. `d_hidden` holds the
// gradient reaching each position's hidden state from above; input gradients
// are accumulated into `d_inputs`.
void BackwardDirection(const LstmCellParams &cell, const MatrixD &inputs,
                       const LstmTrace &trace, const MatrixD &d_hidden,
                       bool reverse, MatrixD &g_input, MatrixD &g_recurrent,
                       MatrixD &g_bias, MatrixD &d_inputs) {
  const size_t n = inputs.rows();
  const size_t m = cell.recurrent_weight.cols();
  std::vector<double> dh_next(m, 0.0);
  std::vector<double> dc_next(m, 0.0);
  std::vector<double> da(4 * m);
  const std::vector<double> zeros(m, 0.0);
  for (size_t s = n; s-- > 0;) {
    const size_t t = Position(s, n, reverse);
    std::span<const double> c_prev = zeros;
    std::span<const double> h_prev = zeros;
    if (s > 0) {
      const size_t prev = Position(s - 1, n, reverse);
      c_prev = trace.cell.row(prev);
      h_prev = trace.hidden.row(prev);
    }
    auto gates = trace.gates.row(t);
    for (size_t j = 0; j < m; ++j) {
      const double i = gates[j];
      const double f = gates[m + j];
      const double g = gates[2 * m + j];
      const double o = gates[3 * m + j];
      const double tc = std::tanh(trace.cell(t, j));
      const double dh = d_hidden(t, j) + dh_next[j];
      const double d_o = dh * tc;
      const double dc = dh * o * (1 - tc * tc) + dc_next[j];
      da[j] = dc * g * i * (1 - i);
      da[m + j] = dc * c_prev[j] * f * (1 - f);
      da[2 * m + j] = dc * i * (1 - g * g);
      da[3 * m + j] = d_o * o * (1 - o);
      dc_next[j] = dc * f;
    }
    std::span<const double> da_span(da);
    AddOuter(g_input, 1.0, da_span, inputs.row(t));
    AddOuter(g_recurrent, 1.0, da_span, h_prev);
    Axpy(1.0, da_span, g_bias.row(0));
    MatTVecAdd(cell.input_weight, da_span, d_inputs.row(t));
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    MatTVecAdd(cell.recurrent_weight, da_span, std::span<double>(dh_next));
  }
}

class EnhancedCache final : public ForwardCache {
 public:
  struct Example {
    const TokenizedQuery *query = nullptr;
    MatrixD inputs;
    LstmTrace forward;
    LstmTrace backward;
    MatrixD states;
    MatrixD att_hidden;
    std::vector<double> alpha;
    std::vector<double> pooled;
  };
  std::vector<Example> examples;
};

}  // namespace

MatrixD BiLstmForward(const BiLstmParams &params, const MatrixD &inputs,
                      LstmTrace *forward_trace, LstmTrace *backward_trace) {
  if (inputs.rows() == 0) {
    throw Error(ErrorCode::kEmptySequence, "BiLSTM input sequence is empty");
  }
  LstmTrace fwd_local;
  LstmTrace bwd_local;
  LstmTrace &fwd = forward_trace ? *forward_trace : fwd_local;
  LstmTrace &bwd = backward_trace ? *backward_trace : bwd_local;
  RunDirection(params.forward, inputs, false, fwd);
  RunDirection(params.backward, inputs, true, bwd);
  const size_t n = inputs.rows();
  const size_t m = params.hidden();
  MatrixD states(n, 2 * m);
  for (size_t t = 0; t < n; ++t) {
    std::copy_n(fwd.hidden.row(t).begin(), m, states.row(t).begin());
    std::copy_n(bwd.hidden.row(t).begin(), m, states.row(t).begin() + m);
  }
  return states;
}

std::vector<double> AttentionWeights(const AttentionParams &params,
                                     const MatrixD &states, MatrixD *hidden_out) {
  const size_t n = states.rows();
  const size_t k = params.weight.rows();
  MatrixD hidden(n, k);
  std::vector<double> scores(n);
  for (size_t t = 0; t < n; ++t) {
    auto u = hidden.row(t);
    MatVec(params.weight, states.row(t), u);
    for (size_t j = 0; j < k; ++j) u[j] = std::tanh(u[j] + params.bias(0, j));
    scores[t] = Dot(params.score.row(0), std::span<const double>(u));
  }
  if (hidden_out) *hidden_out = std::move(hidden);
  return Softmax(scores);
}

std::vector<double> PoolAndProject(const MatrixD &states,
                                   std::span<const double> alpha,
                                   const MatrixD &projection) {
  if (alpha.size() != states.rows() || projection.cols() != states.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "attention weights, states and projection disagree in shape");
  }
  std::vector<double> pooled(states.cols(), 0.0);
  for (size_t t = 0; t < states.rows(); ++t) {
    Axpy(alpha[t], states.row(t), std::span<double>(pooled));
  }
  std::vector<double> q(projection.rows());
  MatVec(projection, std::span<const double>(pooled), std::span<double>(q));
  return q;
}

EnhancedEncoder::EnhancedEncoder(const EnhancedEncoderConfig &config)
    : config_(config) {
  const size_t d = config.embed_dim;
  const size_t m = config.hidden;
  const size_t k = config.attention;
  word_emb_ = MatrixD(config.vocab_size, d);
  for (LstmCellParams *cell : {&lstm_.forward, &lstm_.backward}) {
    cell->input_weight = MatrixD(4 * m, d);
    cell->recurrent_weight = MatrixD(4 * m, m);
    cell->bias = MatrixD(1, 4 * m);
  }
  attention_.weight = MatrixD(k, 2 * m);
  attention_.score = MatrixD(1, k);
  attention_.bias = MatrixD(1, k);
  projection_ = MatrixD(d, 2 * m);
}

void EnhancedEncoder::Initialize(SeededRng &rng) {
  const auto inv_sqrt = [](size_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); };
  const size_t m = config_.hidden;
  InitUniform(word_emb_, inv_sqrt(config_.embed_dim), rng);
  for (LstmCellParams *cell : {&lstm_.forward, &lstm_.backward}) {
    InitUniform(cell->input_weight, inv_sqrt(config_.embed_dim), rng);
    InitUniform(cell->recurrent_weight, inv_sqrt(m), rng);
    InitUniform(cell->bias, inv_sqrt(m), rng);
    for (size_t j = m; j < 2 * m; ++j) cell->bias(0, j) = config_.forget_bias;
  }
  InitUniform(attention_.weight, inv_sqrt(2 * m), rng);
  InitUniform(attention_.bias, inv_sqrt(2 * m), rng);
  InitUniform(attention_.score, inv_sqrt(config_.attention), rng);
  InitUniform(projection_, inv_sqrt(2 * m), rng);
  BumpVersion();
}

std::vector<TensorRef> EnhancedEncoder::Tensors() {
  return {{"word_emb", &word_emb_, true},
          {"lstm.forward.input_weight", &lstm_.forward.input_weight, false},
          {"lstm.forward.recurrent_weight", &lstm_.forward.recurrent_weight, false},
          {"lstm.forward.bias", &lstm_.forward.bias, false},
          {"lstm.backward.input_weight", &lstm_.backward.input_weight, false},
          {"lstm.backward.recurrent_weight", &lstm_.backward.recurrent_weight, false},
          {"lstm.backward.bias", &lstm_.backward.bias, false},
          {"attention.weight", &attention_.weight, false},
          {"attention.score", &attention_.score, false},
          {"attention.bias", &attention_.bias, false},
          {"projection", &projection_, false}};
}

MatrixD EnhancedEncoder::Embed(const TokenizedQuery &query) const {
  MatrixD inputs(query.basic_tokens.size(), config_.embed_dim);
  for (size_t t = 0; t < query.basic_tokens.size(); ++t) {
    auto src = word_emb_.row(query.basic_tokens[t]);
    std::copy(src.begin(), src.end(), inputs.row(t).begin());
  }
  return inputs;
}

EncodedStates EnhancedEncoder::EncodeStates(const TokenizedQuery &query) const {
  EncodedStates out;
  out.states = BiLstmForward(lstm_, Embed(query));
  out.alpha = AttentionWeights(attention_, out.states);
  out.pooled.assign(out.states.cols(), 0.0);
  for (size_t t = 0; t < out.states.rows(); ++t) {
    Axpy(out.alpha[t], out.states.row(t), std::span<double>(out.pooled));
  }
  out.query = PoolAndProject(out.states, out.alpha, projection_);
  return out;
}

std::vector<double> EnhancedEncoder::Encode(const TokenizedQuery &query) const {
  return EncodeStates(query).query;
}

std::unique_ptr<ForwardCache> EnhancedEncoder::Forward(
    std::span<const TokenizedQuery *const> batch, Mode, MatrixD &out) const {
  auto cache = std::make_unique<EnhancedCache>();
  cache->params_version = version();
  cache->batch_size = batch.size();
  cache->examples.resize(batch.size());
  out = MatrixD(batch.size(), config_.embed_dim);
  for (size_t b = 0; b < batch.size(); ++b) {
    EnhancedCache::Example &ex = cache->examples[b];
    ex.query = batch[b];
    ex.inputs = Embed(*batch[b]);
    ex.states = BiLstmForward(lstm_, ex.inputs, &ex.forward, &ex.backward);
    ex.alpha = AttentionWeights(attention_, ex.states, &ex.att_hidden);
    ex.pooled.assign(ex.states.cols(), 0.0);
    for (size_t t = 0; t < ex.states.rows(); ++t) {
      Axpy(ex.alpha[t], ex.states.row(t), std::span<double>(ex.pooled));
    }
    MatVec(projection_, std::span<const double>(ex.pooled), out.row(b));
  }
  return cache;
}

void EnhancedEncoder::Backward(const ForwardCache &base_cache,
                               const MatrixD &d_out,
                               GradientBuffer &grads) const {
  CheckCache(base_cache, d_out);
  const auto &cache = static_cast<const EnhancedCache &>(base_cache);
  const size_t m = config_.hidden;
  const size_t k = config_.attention;
  for (size_t b = 0; b < cache.examples.size(); ++b) {
    const EnhancedCache::Example &ex = cache.examples[b];
    const size_t n = ex.states.rows();
    auto dq = d_out.row(b);

    AddOuter(grads[kProjection], 1.0, dq, std::span<const double>(ex.pooled));
    std::vector<double> d_pooled(2 * m, 0.0);
    MatTVecAdd(projection_, dq, std::span<double>(d_pooled));

    // Pooling: q_pooled = sum_t alpha_t h_t.
    MatrixD d_states(n, 2 * m);
    std::vector<double> d_alpha(n);
    for (size_t t = 0; t < n; ++t) {
      Axpy(ex.alpha[t], std::span<const double>(d_pooled), d_states.row(t));
      d_alpha[t] = Dot(ex.states.row(t), std::span<const double>(d_pooled));
    }
    // Softmax.
    double weighted = 0;
    for (size_t t = 0; t < n; ++t) weighted += ex.alpha[t] * d_alpha[t];
    // Scores s_t = U tanh(W h_t + b).
    std::vector<double> d_pre(k);
    for (size_t t = 0; t < n; ++t) {
      const double d_score = ex.alpha[t] * (d_alpha[t] - weighted);
      auto u = ex.att_hidden.row(t);
      Axpy(d_score, u, grads[kAttScore].row(0));
      for (size_t j = 0; j < k; ++j) {
        d_pre[j] = d_score * attention_.score(0, j) * (1 - u[j] * u[j]);
      }
      std::span<const double> d_pre_span(d_pre);
      AddOuter(grads[kAttWeight], 1.0, d_pre_span, ex.states.row(t));
      Axpy(1.0, d_pre_span, grads[kAttBias].row(0));
      MatTVecAdd(attention_.weight, d_pre_span, d_states.row(t));
    }

    MatrixD d_fwd(n, m);
    MatrixD d_bwd(n, m);
    for (size_t t = 0; t < n; ++t) {
      std::copy_n(d_states.row(t).begin(), m, d_fwd.row(t).begin());
      std::copy_n(d_states.row(t).begin() + m, m, d_bwd.row(t).begin());
    }
    MatrixD d_inputs(n, config_.embed_dim);
    BackwardDirection(lstm_.forward, ex.inputs, ex.forward, d_fwd, false,
                      grads[kFwdInput], grads[kFwdRecurrent], grads[kFwdBias],
                      d_inputs);
    BackwardDirection(lstm_.backward, ex.inputs, ex.backward, d_bwd, true,
                      grads[kBwdInput], grads[kBwdRecurrent], grads[kBwdBias],
                      d_inputs);
    for (size_t t = 0; t < n; ++t) {
      const int32_t id = ex.query->basic_tokens[t];
      Axpy(1.0, d_inputs.row(t), grads[kWordEmb].row(id));
      grads.TouchRow(kWordEmb, id);
    }
  }
}

}  // namespace entrec
