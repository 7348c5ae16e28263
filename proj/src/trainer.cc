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

#include "entrec/trainer.h"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <spdlog/spdlog.h>

#include "entrec/errors.h"
#include "entrec/sampled_softmax.h"
#include "json.hpp"

namespace entrec {
namespace {

void DumpBatch(const std::string &dir, std::span<const TrainingPair *const> batch,
               const std::vector<double> &losses, const Vocabulary &vocab,
               std::string &path_out) {
  nlohmann::json items = nlohmann::json::array();
  for (size_t i = 0; i < batch.size(); ++i) {
    items.push_back({{"query", batch[i]->query.raw},
                     {"target", vocab.Entity(batch[i]->target)},
                     {"weight", batch[i]->weight},
                     {"loss", std::isfinite(losses[i]) ? nlohmann::json(losses[i])
                                                       : nlohmann::json("non-finite")}});
  }
  std::filesystem::create_directories(dir);
  path_out = (std::filesystem::path(dir) / "nonfinite_batch.json").string();
  std::ofstream out(path_out);
  out << nlohmann::json{{"batch", items}}.dump(2) << '\n';
}

}  // namespace

void TrainConfig::Validate(size_t entity_count) const {
  const auto fail = [](const std::string &msg) {
    throw Error(ErrorCode::kConfigInvalid, msg);
  };
  if (!(adam.learning_rate >= 0) || !std::isfinite(adam.learning_rate)) {
    fail("learning rate must be finite and non-negative");
  }
  if (batch_size == 0) fail("batch size must be positive");
  if (model.embed_dim == 0) fail("embedding dimension must be positive");
  if (model.encoder == EncoderKind::kEnhanced &&
      (model.lstm_hidden == 0 || model.attention == 0)) {
    fail("LSTM hidden and attention sizes must be positive");
  }
  if (model.tokenizer.num_buckets == 0) fail("num_buckets must be >= 1");
  if (model.tokenizer.max_len == 0) fail("max_len must be >= 1");
  for (int order : model.tokenizer.ngram_orders) {
    if (order != 2 && order != 3) fail("ngram orders must be drawn from {2, 3}");
  }
  if (entity_count <= 1) {
    throw Error(ErrorCode::kVocabTooSmall, "training needs at least two entities");
  }
  if (sampler != SamplerKind::kExhaustive &&
      (negatives < 1 || negatives > entity_count - 1)) {
    fail("negatives must lie in [1, |V| - 1] = [1, " +
         std::to_string(entity_count - 1) + "]");
  }
}

std::vector<TrainingPair> MakeTrainingPairs(std::span<const QueryEntityRecord> records,
                                            const Tokenizer &tokenizer) {
  std::vector<TrainingPair> pairs;
  pairs.reserve(records.size());
  for (const QueryEntityRecord &record : records) {
    const auto target = tokenizer.vocab().EntityId(record.entity);
    if (!target) continue;
    try {
      pairs.push_back({tokenizer.Tokenize(record.query), *target, record.weight});
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kEmptyQuery) throw;
    }
  }
  return pairs;
}

Model InitializeModel(const TrainConfig &config, const Vocabulary &vocab) {
  Model model;
  model.rng = SeededRng(config.seed);
  model.tokenizer = config.model.tokenizer;
  model.vocab_hash = vocab.Hash();
  model.config_hash = config.config_hash;
  const size_t d = config.model.embed_dim;
  if (config.model.encoder == EncoderKind::kBase) {
    auto encoder = std::make_unique<BaseEncoder>(BaseEncoderConfig::ForDim(
        vocab.word_count(), d, config.model.use_ngrams,
        config.model.tokenizer.num_buckets));
    encoder->Initialize(model.rng);
    model.encoder = std::move(encoder);
  } else {
    EnhancedEncoderConfig c;
    c.vocab_size = vocab.word_count();
    c.embed_dim = d;
    c.hidden = config.model.lstm_hidden;
    c.attention = config.model.attention;
    auto encoder = std::make_unique<EnhancedEncoder>(c);
    encoder->Initialize(model.rng);
    model.encoder = std::move(encoder);
  }
  model.entity_table = MatrixD(vocab.entity_count(), d);
  InitUniform(model.entity_table, 1.0 / std::sqrt(static_cast<double>(d)), model.rng);
  return model;
}

TrainResult Train(std::span<const TrainingPair> pairs, const Vocabulary &vocab,
                  const TrainConfig &config) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyCorpus, "no training pairs");
  config.Validate(vocab.entity_count());
  TrainResult result{InitializeModel(config, vocab), {}, {}};
  Model &model = result.model;
  QueryEncoder &encoder = *model.encoder;
  SeededRng &rng = model.rng;

  std::vector<TensorRef> tensors = encoder.Tensors();
  const size_t entity_tensor = tensors.size();
  tensors.push_back({"entity_table", &model.entity_table, true});
  GradientBuffer grads(tensors);
  Adam adam(tensors, config.adam);
  const NegativeSampler sampler(config.sampler, vocab.entity_count(),
                                vocab.entity_freqs());
  const bool correct = config.logit_correction && config.sampler != SamplerKind::kExhaustive;

  std::ofstream run_log;
  if (!config.run_log_path.empty()) {
    run_log.open(config.run_log_path);
    if (!run_log) throw Error(ErrorCode::kIo, "cannot write " + config.run_log_path);
  }

  std::vector<size_t> order(pairs.size());
  std::vector<const TrainingPair *> batch_pairs;
  std::vector<const TokenizedQuery *> batch_queries;
  std::vector<double> losses;
  MatrixD q;
  for (size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    Shuffle(order, rng);
    double epoch_loss = 0;
    for (size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const size_t end = std::min(order.size(), begin + config.batch_size);
      batch_pairs.clear();
      batch_queries.clear();
      for (size_t i = begin; i < end; ++i) {
        batch_pairs.push_back(&pairs[order[i]]);
        batch_queries.push_back(&pairs[order[i]].query);
      }
      const size_t n = batch_pairs.size();
      const double scale = 1.0 / static_cast<double>(n);
      auto cache = encoder.Forward(batch_queries, Mode::kTrain, q);
      MatrixD d_q(n, q.cols());
      losses.assign(n, 0.0);
      double batch_loss = 0;
      for (size_t b = 0; b < n; ++b) {
        const TrainingPair &pair = *batch_pairs[b];
        const NegativeSample negatives =
            sampler.Sample(rng, config.negatives, pair.target);
        const SampledSoftmaxResult r = SampledSoftmaxLoss(
            q.row(b), pair.target, negatives, model.entity_table, correct);
        losses[b] = r.loss;
        batch_loss += pair.weight * r.loss;
        const double w = pair.weight * scale;
        Axpy(w, r.d_query, d_q.row(b));
        for (size_t i = 0; i < r.rows.size(); ++i) {
          Axpy(w, r.d_rows.row(i), grads[entity_tensor].row(r.rows[i]));
          grads.TouchRow(entity_tensor, r.rows[i]);
        }
      }
      if (!std::isfinite(batch_loss)) {
        std::string dump_path;
        DumpBatch(config.dump_dir, batch_pairs, losses, vocab, dump_path);
        throw Error(ErrorCode::kNonFiniteLoss,
                    "epoch " + std::to_string(epoch) + ": batch dumped to " + dump_path);
      }
      encoder.Backward(*cache, d_q, grads);
      encoder.CommitTrainStatistics(*cache);
      adam.Step(tensors, grads);
      encoder.BumpVersion();
      grads.Clear();
      ++model.step;
      epoch_loss += batch_loss;
      result.step_losses.push_back(batch_loss * scale);
    }
    const double wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    EpochStats stats{epoch, epoch_loss / static_cast<double>(pairs.size()), wall_ms};
    result.epochs.push_back(stats);
    spdlog::debug("epoch {} mean_loss {:.6f} ({:.0f} ms)", epoch, stats.mean_loss,
                  wall_ms);
    if (run_log.is_open()) {
      run_log << nlohmann::json{{"epoch", epoch},
                                {"mean_loss", stats.mean_loss},
                                {"wall_ms", wall_ms},
                                {"seed", config.seed},
                                {"config_hash", config.config_hash}}
                     .dump()
              << '\n';
      run_log.flush();
    }
    if (!config.checkpoint_path.empty()) SaveCheckpoint(model, config.checkpoint_path);
  }
  if (config.epochs == 0 && !config.checkpoint_path.empty()) {
    SaveCheckpoint(model, config.checkpoint_path);
  }
  return result;
}

}  // namespace entrec
