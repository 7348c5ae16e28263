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

#include "entrec/base_encoder.h"

#include <cmath>

#include "entrec/errors.h"

namespace entrec {
namespace {

size_t WeightTensor(size_t layer) { return 2 + 4 * layer; }
size_t BiasTensor(size_t layer) { return 3 + 4 * layer; }
size_t ScaleTensor(size_t layer) { return 4 + 4 * layer; }
size_t ShiftTensor(size_t layer) { return 5 + 4 * layer; }

struct LayerCache {
  MatrixD input;    // B x in
  MatrixD zhat;     // B x out, normalized pre-activation
  MatrixD output;   // B x out, tanh output
  std::vector<double> inv_std;
  std::vector<double> batch_mean;
  std::vector<double> batch_var;
};

class BaseCache final : public ForwardCache {
 public:
  Mode mode = Mode::kInfer;
  std::vector<const TokenizedQuery *> batch;
  std::array<LayerCache, BaseEncoder::kLayers> layers;
};

}  // namespace

BaseEncoderConfig BaseEncoderConfig::ForDim(size_t vocab_size, size_t embed_dim,
                                            bool use_ngrams,
                                            uint32_t num_buckets) {
  BaseEncoderConfig c;
  c.vocab_size = vocab_size;
  c.embed_dim = embed_dim;
  c.hidden1 = 4 * embed_dim;
  c.hidden2 = 2 * embed_dim;
  c.use_ngrams = use_ngrams;
  c.num_buckets = num_buckets;
  return c;
}

BaseEncoder::BaseEncoder(const BaseEncoderConfig &config) : config_(config) {
  const size_t d = config.embed_dim;
  word_emb_ = MatrixD(config.vocab_size, d);
  ngram_emb_ = MatrixD(config.use_ngrams ? config.num_buckets : 0, d);
  const std::array<size_t, kLayers + 1> widths = {2 * d, config.hidden1,
                                                  config.hidden2, d};
  for (size_t l = 0; l < kLayers; ++l) {
    DenseLayerParams &layer = layers_[l];
    layer.weight = MatrixD(widths[l + 1], widths[l]);
    layer.bias = MatrixD(1, widths[l + 1]);
    layer.bn.scale = MatrixD(1, widths[l + 1], 1.0);
    layer.bn.shift = MatrixD(1, widths[l + 1]);
    layer.bn.running_mean = MatrixD(1, widths[l + 1]);
    layer.bn.running_var = MatrixD(1, widths[l + 1], 1.0);
  }
}

void BaseEncoder::Initialize(SeededRng &rng) {
  const double emb_bound = 1.0 / std::sqrt(static_cast<double>(config_.embed_dim));
  InitUniform(word_emb_, emb_bound, rng);
  InitUniform(ngram_emb_, emb_bound, rng);
  for (DenseLayerParams &layer : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    InitUniform(layer.weight, bound, rng);
    InitUniform(layer.bias, bound, rng);
    layer.bn.scale.Fill(1.0);
    layer.bn.shift.Fill(0.0);
    layer.bn.running_mean.Fill(0.0);
    layer.bn.running_var.Fill(1.0);
  }
  BumpVersion();
}

std::vector<TensorRef> BaseEncoder::Tensors() {
  std::vector<TensorRef> tensors = {{"word_emb", &word_emb_, true},
                                    {"ngram_emb", &ngram_emb_, true}};
  for (size_t l = 0; l < kLayers; ++l) {
    const std::string p = "fc" + std::to_string(l + 1);
    const std::string b = "bn" + std::to_string(l + 1);
    tensors.push_back({p + ".weight", &layers_[l].weight, false});
    tensors.push_back({p + ".bias", &layers_[l].bias, false});
    tensors.push_back({b + ".scale", &layers_[l].bn.scale, false});
    tensors.push_back({b + ".shift", &layers_[l].bn.shift, false});
  }
  return tensors;
}

std::vector<MatrixD *> BaseEncoder::RunningStats() {
  std::vector<MatrixD *> stats;
  for (DenseLayerParams &layer : layers_) {
    stats.push_back(&layer.bn.running_mean);
    stats.push_back(&layer.bn.running_var);
  }
  return stats;
}

std::vector<double> BaseEncoder::EmbedAverage(const TokenizedQuery &query) const {
  if (query.basic_tokens.empty()) {
    throw Error(ErrorCode::kEmptyQuery, "query has no basic tokens");
  }
  const size_t d = config_.embed_dim;
  std::vector<double> x(2 * d, 0.0);
  std::span<double> words(x.data(), d);
  std::span<double> ngrams(x.data() + d, d);
  const size_t count = query.basic_tokens.size() + query.semantic_tokens.size();
  const double w = 1.0 / static_cast<double>(count);
  for (int32_t id : query.basic_tokens) Axpy(w, word_emb_.row(id), words);
  for (int32_t id : query.semantic_tokens) Axpy(w, word_emb_.row(id), words);
  if (config_.use_ngrams && !query.ngram_ids.empty()) {
    const double wn = 1.0 / static_cast<double>(query.ngram_ids.size());
    for (uint32_t id : query.ngram_ids) Axpy(wn, ngram_emb_.row(id), ngrams);
  }
  return x;
}

std::unique_ptr<ForwardCache> BaseEncoder::Forward(
    std::span<const TokenizedQuery *const> batch, Mode mode, MatrixD &out) const {
  auto cache = std::make_unique<BaseCache>();
  cache->params_version = version();
  cache->batch_size = batch.size();
  cache->mode = mode;
  cache->batch.assign(batch.begin(), batch.end());
  const size_t n = batch.size();

  MatrixD input(n, 2 * config_.embed_dim);
  for (size_t b = 0; b < n; ++b) {
    const std::vector<double> x = EmbedAverage(*batch[b]);
    std::copy(x.begin(), x.end(), input.row(b).begin());
  }

  for (size_t l = 0; l < kLayers; ++l) {
    const DenseLayerParams &layer = layers_[l];
    LayerCache &lc = cache->layers[l];
    const size_t width = layer.weight.rows();
    MatrixD z(n, width);
    for (size_t b = 0; b < n; ++b) {
      auto zr = z.row(b);
      MatVec(layer.weight, input.row(b), zr);
      Axpy(1.0, layer.bias.row(0), zr);
    }
    lc.batch_mean.assign(width, 0.0);
    lc.batch_var.assign(width, 0.0);
    lc.inv_std.assign(width, 0.0);
    for (size_t j = 0; j < width; ++j) {
      double mean;
      double var;
      if (mode == Mode::kTrain) {
        mean = 0;
        for (size_t b = 0; b < n; ++b) mean += z(b, j);
        mean /= static_cast<double>(n);
        var = 0;
        for (size_t b = 0; b < n; ++b) var += (z(b, j) - mean) * (z(b, j) - mean);
        var /= static_cast<double>(n);
      } else {
        mean = layer.bn.running_mean(0, j);
        var = layer.bn.running_var(0, j);
      }
      lc.batch_mean[j] = mean;
      lc.batch_var[j] = var;
      lc.inv_std[j] = 1.0 / std::sqrt(var + config_.bn_epsilon);
    }
    lc.zhat = MatrixD(n, width);
    lc.output = MatrixD(n, width);
    for (size_t b = 0; b < n; ++b) {
      for (size_t j = 0; j < width; ++j) {
        const double zh = (z(b, j) - lc.batch_mean[j]) * lc.inv_std[j];
        lc.zhat(b, j) = zh;
        lc.output(b, j) =
            std::tanh(layer.bn.scale(0, j) * zh + layer.bn.shift(0, j));
      }
    }
    lc.input = std::move(input);
    input = lc.output;
  }
  out = std::move(input);
  return cache;
}

std::vector<double> BaseEncoder::Encode(const TokenizedQuery &query) const {
  const TokenizedQuery *batch[] = {&query};
  MatrixD out;
  Forward(batch, Mode::kInfer, out);
  return {out.row(0).begin(), out.row(0).end()};
}

void BaseEncoder::CommitTrainStatistics(const ForwardCache &base_cache) {
  const auto &cache = static_cast<const BaseCache &>(base_cache);
  if (cache.mode != Mode::kTrain) return;
  const double momentum = config_.bn_momentum;
  const double n = static_cast<double>(cache.batch_size);
  const double correction = n > 1 ? n / (n - 1) : 1.0;
  for (size_t l = 0; l < kLayers; ++l) {
    BatchNormParams &bn = layers_[l].bn;
    const LayerCache &lc = cache.layers[l];
    for (size_t j = 0; j < lc.batch_mean.size(); ++j) {
      bn.running_mean(0, j) =
          momentum * bn.running_mean(0, j) + (1 - momentum) * lc.batch_mean[j];
      bn.running_var(0, j) = momentum * bn.running_var(0, j) +
                             (1 - momentum) * lc.batch_var[j] * correction;
    }
  }
}

void BaseEncoder::Backward(const ForwardCache &base_cache, const MatrixD &d_out,
                           GradientBuffer &grads) const {
  CheckCache(base_cache, d_out);
  const auto &cache = static_cast<const BaseCache &>(base_cache);
  const size_t n = cache.batch_size;
  MatrixD d_a = d_out;
  for (size_t li = kLayers; li-- > 0;) {
    const DenseLayerParams &layer = layers_[li];
    const LayerCache &lc = cache.layers[li];
    const size_t width = layer.weight.rows();
    MatrixD &g_scale = grads[ScaleTensor(li)];
    MatrixD &g_shift = grads[ShiftTensor(li)];
    MatrixD d_zhat(n, width);
    for (size_t b = 0; b < n; ++b) {
      for (size_t j = 0; j < width; ++j) {
        const double a = lc.output(b, j);
        const double dy = d_a(b, j) * (1 - a * a);
        g_scale(0, j) += dy * lc.zhat(b, j);
        g_shift(0, j) += dy;
        d_zhat(b, j) = dy * layer.bn.scale(0, j);
      }
    }
    MatrixD d_z(n, width);
    if (cache.mode == Mode::kTrain) {
      for (size_t j = 0; j < width; ++j) {
        double sum = 0;
        double sum_z = 0;
        for (size_t b = 0; b < n; ++b) {
          sum += d_zhat(b, j);
          sum_z += d_zhat(b, j) * lc.zhat(b, j);
        }
        const double scale = lc.inv_std[j] / static_cast<double>(n);
        for (size_t b = 0; b < n; ++b) {
          d_z(b, j) = scale * (static_cast<double>(n) * d_zhat(b, j) - sum -
                               lc.zhat(b, j) * sum_z);
        }
      }
    } else {
      for (size_t b = 0; b < n; ++b) {
        for (size_t j = 0; j < width; ++j) d_z(b, j) = d_zhat(b, j) * lc.inv_std[j];
      }
    }
    MatrixD &g_weight = grads[WeightTensor(li)];
    MatrixD &g_bias = grads[BiasTensor(li)];
    MatrixD d_input(n, layer.weight.cols());
    for (size_t b = 0; b < n; ++b) {
      AddOuter(g_weight, 1.0, d_z.row(b), lc.input.row(b));
      Axpy(1.0, d_z.row(b), g_bias.row(0));
      MatTVecAdd(layer.weight, d_z.row(b), d_input.row(b));
    }
    d_a = std::move(d_input);
  }

  const size_t d = config_.embed_dim;
  MatrixD &g_word = grads[kWordEmbTensor];
  MatrixD &g_ngram = grads[kNgramEmbTensor];
  for (size_t b = 0; b < n; ++b) {
    const TokenizedQuery &q = *cache.batch[b];
    std::span<const double> d_words(d_a.row(b).data(), d);
    std::span<const double> d_ngrams(d_a.row(b).data() + d, d);
    const double w =
        1.0 / static_cast<double>(q.basic_tokens.size() + q.semantic_tokens.size());
    for (const auto *tokens : {&q.basic_tokens, &q.semantic_tokens}) {
      for (int32_t id : *tokens) {
        Axpy(w, d_words, g_word.row(id));
        grads.TouchRow(kWordEmbTensor, id);
      }
    }
    if (config_.use_ngrams && !q.ngram_ids.empty()) {
      const double wn = 1.0 / static_cast<double>(q.ngram_ids.size());
      for (uint32_t id : q.ngram_ids) {
        Axpy(wn, d_ngrams, g_ngram.row(id));
        grads.TouchRow(kNgramEmbTensor, id);
      }
    }
  }
}

}  // namespace entrec
