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

#ifndef ENTREC_TRAINER_H_
#define ENTREC_TRAINER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "entrec/adam.h"
#include "entrec/model.h"
#include "entrec/sampler.h"
#include "entrec/vocab.h"

namespace entrec {

struct ModelConfig {
  EncoderKind encoder = EncoderKind::kEnhanced;
  size_t embed_dim = 128;
  bool use_ngrams = true;    // base encoder only
  size_t lstm_hidden = 128;  // enhanced encoder only
  size_t attention = 64;     // enhanced encoder only
  TokenizerOptions tokenizer;
};

struct TrainConfig {
  ModelConfig model;
  AdamConfig adam;
  size_t batch_size = 32;
  // The production setting samples 5000 negatives; 100 suits desk-scale runs.
  size_t negatives = 100;
  size_t epochs = 5;
  uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::kLogUniform;
  bool logit_correction = true;
  std::string checkpoint_path;  // rewritten after every epoch when set
  std::string run_log_path;     // JSON lines, one record per epoch
  std::string dump_dir = ".";   // where a non-finite batch is dumped
  std::string config_hash;

  // Throws ConfigInvalid.
  void Validate(size_t entity_count) const;
};

struct TrainingPair {
  TokenizedQuery query;
  int32_t target = 0;
  double weight = 1.0;
};

// Tokenizes records; drops those whose entity is not in the vocabulary or
// whose query has no tokens.
std::vector<TrainingPair> MakeTrainingPairs(std::span<const QueryEntityRecord> records,
                                            const Tokenizer &tokenizer);

// Fresh encoder plus entity table, all drawn from one RNG seeded with
// config.seed.
Model InitializeModel(const TrainConfig &config, const Vocabulary &vocab);

struct EpochStats {
  size_t epoch = 0;
  double mean_loss = 0;
  double wall_ms = 0;
};

struct TrainResult {
  Model model;
  std::vector<double> step_losses;
  std::vector<EpochStats> epochs;
};

// Minibatch Adam over sampled-softmax loss. Each example's loss is scaled by
// its pair weight; a batch's loss is the weighted sum divided by batch size.
// Single-threaded and fully determined by config.seed. Throws NonFiniteLoss
// after dumping the offending batch to config.dump_dir.
TrainResult Train(std::span<const TrainingPair> pairs, const Vocabulary &vocab,
                  const TrainConfig &config);

}  // namespace entrec

#endif  // ENTREC_TRAINER_H_
