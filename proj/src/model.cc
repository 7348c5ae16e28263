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

#include "entrec/model.h"

#include <bit>
#include <fstream>
#include <sstream>

#include "entrec/errors.h"
#include "entrec/io.h"

namespace entrec {
namespace {

constexpr char kMagic[] = "ENTRECKP";

struct NamedTensor {
  std::string name;
  MatrixD *value;
};

std::vector<NamedTensor> AllTensors(QueryEncoder &encoder, MatrixD &entity_table) {
  std::vector<NamedTensor> out;
  for (const TensorRef &t : encoder.Tensors()) out.push_back({t.name, t.value});
  if (auto *base = dynamic_cast<BaseEncoder *>(&encoder)) {
    for (size_t l = 0; l < BaseEncoder::kLayers; ++l) {
      const std::string p = "bn" + std::to_string(l + 1);
      out.push_back({p + ".running_mean", &base->layer(l).bn.running_mean});
      out.push_back({p + ".running_var", &base->layer(l).bn.running_var});
    }
  }
  out.push_back({"entity_table", &entity_table});
  return out;
}

}  // namespace

void SaveCheckpoint(const Model &model, const std::string &path) {
  std::ostringstream buffer;
  BinaryWriter w(buffer);
  w.WriteBytes(std::string_view(kMagic, 8));
  w.WriteU32(kCheckpointVersion);
  w.WriteU32(static_cast<uint32_t>(model.kind()));
  // Tensor access needs a mutable encoder; nothing below modifies it.
  auto &encoder = const_cast<QueryEncoder &>(*model.encoder);
  auto &table = const_cast<MatrixD &>(model.entity_table);
  size_t vocab_size = 0;
  if (const auto *base = dynamic_cast<const BaseEncoder *>(model.encoder.get())) {
    vocab_size = base->config().vocab_size;
  } else {
    vocab_size = static_cast<const EnhancedEncoder &>(*model.encoder).config().vocab_size;
  }
  w.WriteU32(static_cast<uint32_t>(model.dim()));
  w.WriteU32(static_cast<uint32_t>(vocab_size));
  w.WriteU32(static_cast<uint32_t>(model.entity_table.rows()));
  w.WriteU32(static_cast<uint32_t>(model.tokenizer.max_len));
  w.WriteU32(model.tokenizer.num_buckets);
  w.WriteU32(static_cast<uint32_t>(model.tokenizer.ngram_orders.size()));
  for (int order : model.tokenizer.ngram_orders) w.WriteU32(static_cast<uint32_t>(order));
  if (const auto *base = dynamic_cast<const BaseEncoder *>(model.encoder.get())) {
    const BaseEncoderConfig &c = base->config();
    w.WriteU32(c.use_ngrams ? 1 : 0);
    w.WriteU32(static_cast<uint32_t>(c.hidden1));
    w.WriteU32(static_cast<uint32_t>(c.hidden2));
    w.WriteF64(c.bn_epsilon);
    w.WriteF64(c.bn_momentum);
  } else {
    const auto &c = static_cast<const EnhancedEncoder &>(*model.encoder).config();
    w.WriteU32(static_cast<uint32_t>(c.hidden));
    w.WriteU32(static_cast<uint32_t>(c.attention));
    w.WriteF64(c.forget_bias);
  }
  w.WriteU64(model.rng.seed());
  w.WriteString(SeededRng::kAlgorithm);
  w.WriteString(model.rng.SaveState());
  w.WriteU64(model.step);
  w.WriteU64(model.vocab_hash);
  w.WriteString(model.config_hash);
  const std::vector<NamedTensor> tensors = AllTensors(encoder, table);
  w.WriteU32(static_cast<uint32_t>(tensors.size()));
  for (const NamedTensor &t : tensors) {
    w.WriteString(t.name);
    w.WriteU32(static_cast<uint32_t>(t.value->rows()));
    w.WriteU32(static_cast<uint32_t>(t.value->cols()));
    for (double v : t.value->values()) w.WriteF64(v);
  }
  WriteFile(path, buffer.str());
}

Model LoadCheckpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInputMissing, "cannot open checkpoint " + path);
  BinaryReader r(in, path);
  if (r.ReadBytes(8) != std::string_view(kMagic, 8)) r.Fail("not a checkpoint file");
  if (r.ReadU32() != kCheckpointVersion) r.Fail("unsupported checkpoint version");
  const uint32_t kind = r.ReadU32();
  if (kind > 1) r.Fail("unknown encoder kind");
  const size_t dim = r.ReadU32();
  const size_t vocab_size = r.ReadU32();
  const size_t entity_count = r.ReadU32();
  Model model;
  model.tokenizer.max_len = r.ReadU32();
  model.tokenizer.num_buckets = r.ReadU32();
  model.tokenizer.ngram_orders.resize(r.ReadU32());
  for (int &order : model.tokenizer.ngram_orders) order = static_cast<int>(r.ReadU32());
  if (static_cast<EncoderKind>(kind) == EncoderKind::kBase) {
    BaseEncoderConfig c;
    c.vocab_size = vocab_size;
    c.embed_dim = dim;
    c.num_buckets = model.tokenizer.num_buckets;
    c.use_ngrams = r.ReadU32() != 0;
    c.hidden1 = r.ReadU32();
    c.hidden2 = r.ReadU32();
    c.bn_epsilon = r.ReadF64();
    c.bn_momentum = r.ReadF64();
    model.encoder = std::make_unique<BaseEncoder>(c);
  } else {
    EnhancedEncoderConfig c;
    c.vocab_size = vocab_size;
    c.embed_dim = dim;
    c.hidden = r.ReadU32();
    c.attention = r.ReadU32();
    c.forget_bias = r.ReadF64();
    model.encoder = std::make_unique<EnhancedEncoder>(c);
  }
  const uint64_t seed = r.ReadU64();
  if (r.ReadString() != SeededRng::kAlgorithm) r.Fail("unsupported RNG algorithm");
  model.rng.RestoreState(seed, r.ReadString());
  model.step = r.ReadU64();
  model.vocab_hash = r.ReadU64();
  model.config_hash = r.ReadString();
  model.entity_table = MatrixD(entity_count, dim);
  const std::vector<NamedTensor> tensors = AllTensors(*model.encoder, model.entity_table);
  if (r.ReadU32() != tensors.size()) r.Fail("tensor count does not match encoder");
  for (const NamedTensor &t : tensors) {
    if (r.ReadString() != t.name) r.Fail("expected tensor " + t.name);
    const size_t rows = r.ReadU32();
    const size_t cols = r.ReadU32();
    if (rows != t.value->rows() || cols != t.value->cols()) {
      r.Fail("tensor " + t.name + " has unexpected shape");
    }
    const std::string blob = r.ReadBytes(t.value->size() * 8);
    auto values = t.value->values();
    for (size_t i = 0; i < values.size(); ++i) {
      uint64_t bits = 0;
      for (int b = 7; b >= 0; --b) {
        bits = (bits << 8) | static_cast<unsigned char>(blob[i * 8 + b]);
      }
      values[i] = std::bit_cast<double>(bits);
    }
  }
  model.encoder->BumpVersion();
  return model;
}

}  // namespace entrec
