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

#ifndef ENTREC_MODEL_H_
#define ENTREC_MODEL_H_

#include <cstdint>
#include <memory>
#include <string>
#include <variant>

#include "entrec/base_encoder.h"
#include "entrec/enhanced_encoder.h"
#include "entrec/rng.h"
#include "entrec/vocab.h"

namespace entrec {

// A trained (or freshly initialized) query tower together with the entity
// output-embedding table it was trained against.
struct Model {
  std::unique_ptr<QueryEncoder> encoder;
  MatrixD entity_table;  // |V| x d
  TokenizerOptions tokenizer;
  SeededRng rng;
  uint64_t step = 0;
  uint64_t vocab_hash = 0;
  std::string config_hash;

  EncoderKind kind() const { return encoder->kind(); }
  size_t dim() const { return encoder->output_dim(); }
};

// Checkpoint layout (all integers and floats little-endian):
//
//   bytes[8]  magic "ENTRECKP"
//   u32       format version (1)
//   u32       encoder kind (0 base, 1 enhanced)
//   u32       embed dim, vocab size, entity count, max_len, num_buckets
//   u32       ngram order count, then each order
//   base:     u32 use_ngrams, u32 hidden1, u32 hidden2, f64 bn eps,
//             f64 bn momentum
//   enhanced: u32 lstm hidden, u32 attention size, f64 forget bias
//   u64       rng seed; string rng algorithm; string rng state
//   u64       optimizer step; u64 vocabulary hash; string config hash
//   u32       tensor count, then per tensor: string name, u32 rows, u32 cols,
//             rows*cols f64 values (row-major)
//
// Strings are u32 length + bytes. Tensors are the encoder's trainable tensors
// in Tensors() order, base batch-norm running statistics, and finally
// "entity_table".
void SaveCheckpoint(const Model &model, const std::string &path);
Model LoadCheckpoint(const std::string &path);

inline constexpr uint32_t kCheckpointVersion = 1;

}  // namespace entrec

#endif  // ENTREC_MODEL_H_
