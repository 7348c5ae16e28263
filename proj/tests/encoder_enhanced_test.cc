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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "entrec/enhanced_encoder.h"
#include "entrec/errors.h"
#include "entrec/io.h"
#include "entrec/model.h"
#include "test_util.h"

namespace entrec {
namespace {

constexpr size_t kVocab = 50;

EnhancedEncoderConfig Config(size_t d = 16, size_t m = 8, size_t k = 4) {
  EnhancedEncoderConfig c;
  c.vocab_size = kVocab;
  c.embed_dim = d;
  c.hidden = m;
  c.attention = k;
  return c;
}

EnhancedEncoder MakeEncoder(uint64_t seed, const EnhancedEncoderConfig &config = Config()) {
  EnhancedEncoder enc(config);
  SeededRng rng(seed);
  enc.Initialize(rng);
  return enc;
}

LstmCellParams RandomCell(SeededRng &rng, size_t d, size_t m) {
  return {testing::RandomMatrix(rng, 4 * m, d, 0.5), testing::RandomMatrix(rng, 4 * m, m, 0.5),
          testing::RandomMatrix(rng, 1, 4 * m, 0.5)};
}

long double LSigmoid(long double x) { return 1.0L / (1.0L + std::exp(-x)); }

// One direction of the LSTM, unrolled step by step in extended precision.
std::vector<std::vector<long double>> OracleLstm(const LstmCellParams &p, const MatrixD &x,
                                                 bool reverse) {
  const size_t n = x.rows(), m = p.recurrent_weight.cols();
  std::vector<std::vector<long double>> out(n);
  std::vector<long double> h(m, 0.0L), c(m, 0.0L);
  for (size_t step = 0; step < n; ++step) {
    const size_t t = reverse ? n - 1 - step : step;
    std::vector<long double> z(4 * m);
    for (size_t r = 0; r < 4 * m; ++r) {
      long double s = p.bias(0, r);
      for (size_t j = 0; j < x.cols(); ++j) s += p.input_weight(r, j) * x(t, j);
      for (size_t j = 0; j < m; ++j) s += p.recurrent_weight(r, j) * h[j];
      z[r] = s;
    }
    for (size_t u = 0; u < m; ++u) {
      const long double i = LSigmoid(z[u]), f = LSigmoid(z[m + u]);
      const long double g = std::tanh(z[2 * m + u]), o = LSigmoid(z[3 * m + u]);
      c[u] = f * c[u] + i * g;
      h[u] = o * std::tanh(c[u]);
    }
    out[t] = h;
  }
  return out;
}

std::vector<long double> OracleScores(const AttentionParams &p, const MatrixD &states) {
  std::vector<long double> scores;
  for (size_t i = 0; i < states.rows(); ++i) {
    long double s = 0;
    for (size_t a = 0; a < p.weight.rows(); ++a) {
      long double h = p.bias(0, a);
      for (size_t j = 0; j < states.cols(); ++j) h += p.weight(a, j) * states(i, j);
      s += p.score(0, a) * std::tanh(h);
    }
    scores.push_back(s);
  }
  return scores;
}

std::vector<long double> OracleSoftmax(const std::vector<long double> &v) {
  const long double mx = *std::max_element(v.begin(), v.end());
  long double sum = 0;
  std::vector<long double> out;
  for (long double x : v) {
    out.push_back(std::exp(x - mx));
    sum += out.back();
  }
  for (long double &x : out) x /= sum;
  return out;
}

AttentionParams RandomAttention(SeededRng &rng, size_t k, size_t width) {
  return {testing::RandomMatrix(rng, k, width), testing::RandomMatrix(rng, 1, k),
          testing::RandomMatrix(rng, 1, k)};
}

std::vector<TokenizedQuery> RandomBatch(SeededRng &rng, size_t size, size_t max_n = 6) {
  std::vector<TokenizedQuery> batch;
  for (size_t i = 0; i < size; ++i) {
    batch.push_back(testing::RandomQuery(rng, kVocab, 1 + rng.UniformInt(max_n), 0, 0));
  }
  return batch;
}

TEST_CASE("zero LSTM parameters give zero hidden states") {
  SeededRng rng(1);
  BiLstmParams p{{MatrixD(32, 16), MatrixD(32, 8), MatrixD(1, 32)},
                 {MatrixD(32, 16), MatrixD(32, 8), MatrixD(1, 32)}};
  const MatrixD states = BiLstmForward(p, testing::RandomMatrix(rng, 5, 16));
  CHECK(states.rows() == 5);
  CHECK(states.cols() == 16);
  for (double v : states.values()) CHECK(v == 0.0);
}

TEST_CASE("a single step gives one row") {
  SeededRng rng(2);
  const BiLstmParams p{RandomCell(rng, 6, 3), RandomCell(rng, 6, 3)};
  const MatrixD states = BiLstmForward(p, testing::RandomMatrix(rng, 1, 6));
  CHECK(states.rows() == 1);
  CHECK(states.cols() == 6);
}

TEST_CASE("empty sequences are rejected") {
  SeededRng rng(3);
  const BiLstmParams p{RandomCell(rng, 6, 3), RandomCell(rng, 6, 3)};
  try {
    BiLstmForward(p, MatrixD(0, 6));
    FAIL("expected EmptySequence");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kEmptySequence);
  }
}

TEST_CASE("BiLSTM matches a hand-unrolled recurrence") {
  SeededRng rng(4);
  const size_t d = 5, m = 4;
  const BiLstmParams p{RandomCell(rng, d, m), RandomCell(rng, d, m)};
  const MatrixD x = testing::RandomMatrix(rng, 3, d);
  const MatrixD states = BiLstmForward(p, x);
  const auto fwd = OracleLstm(p.forward, x, false);
  const auto bwd = OracleLstm(p.backward, x, true);
  for (size_t t = 0; t < 3; ++t) {
    for (size_t u = 0; u < m; ++u) {
      CHECK(std::abs(states(t, u) - static_cast<double>(fwd[t][u])) < 1e-10);
      CHECK(std::abs(states(t, m + u) - static_cast<double>(bwd[t][u])) < 1e-10);
    }
  }
}

TEST_CASE("reversing the input and swapping directions mirrors the states") {
  SeededRng rng(5);
  const size_t d = 4, m = 3, n = 5;
  const BiLstmParams p{RandomCell(rng, d, m), RandomCell(rng, d, m)};
  const BiLstmParams swapped{p.backward, p.forward};
  const MatrixD x = testing::RandomMatrix(rng, n, d);
  MatrixD reversed(n, d);
  for (size_t t = 0; t < n; ++t) {
    std::copy(x.row(n - 1 - t).begin(), x.row(n - 1 - t).end(), reversed.row(t).begin());
  }
  const MatrixD h = BiLstmForward(p, x);
  const MatrixD r = BiLstmForward(swapped, reversed);
  for (size_t t = 0; t < n; ++t) {
    for (size_t u = 0; u < m; ++u) {
      CHECK(std::abs(r(t, u) - h(n - 1 - t, m + u)) < 1e-14);
      CHECK(std::abs(r(t, m + u) - h(n - 1 - t, u)) < 1e-14);
    }
  }
}

TEST_CASE("attention of a single state is exactly one") {
  SeededRng rng(6);
  const AttentionParams p = RandomAttention(rng, 4, 6);
  const auto alpha = AttentionWeights(p, testing::RandomMatrix(rng, 1, 6));
  REQUIRE(alpha.size() == 1);
  CHECK(alpha[0] == 1.0);
}

TEST_CASE("duplicate states get equal attention") {
  SeededRng rng(7);
  const AttentionParams p = RandomAttention(rng, 4, 6);
  MatrixD states = testing::RandomMatrix(rng, 4, 6);
  std::copy(states.row(1).begin(), states.row(1).end(), states.row(3).begin());
  const auto alpha = AttentionWeights(p, states);
  CHECK(alpha[1] == alpha[3]);
}

TEST_CASE("attention matches direct matrix arithmetic and is shift invariant") {
  SeededRng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const AttentionParams p = RandomAttention(rng, 3, 8);
    const MatrixD states = testing::RandomMatrix(rng, 4, 8);
    const auto alpha = AttentionWeights(p, states);
    auto scores = OracleScores(p, states);
    const auto expected = OracleSoftmax(scores);
    for (long double &s : scores) s += 17.25L;
    const auto shifted = OracleSoftmax(scores);
    for (size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(alpha[i] - static_cast<double>(expected[i])) < 1e-12);
      CHECK(std::abs(alpha[i] - static_cast<double>(shifted[i])) < 1e-12);
    }
  }
}

TEST_CASE("attention weights are a distribution") {
  SeededRng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 1 + rng.UniformInt(10);
    const AttentionParams p = RandomAttention(rng, 5, 6);
    const auto alpha = AttentionWeights(p, testing::RandomMatrix(rng, n, 6, 3.0));
    double sum = 0;
    for (double a : alpha) {
      CHECK(a >= 0);
      sum += a;
    }
    CHECK(std::abs(sum - 1) < 1e-9);
  }
}

TEST_CASE("pooling with one-hot weights projects that row") {
  SeededRng rng(10);
  const MatrixD states = testing::RandomMatrix(rng, 3, 6);
  const MatrixD proj = testing::RandomMatrix(rng, 4, 6);
  const double alpha[] = {0, 1, 0};
  const auto q = PoolAndProject(states, alpha, proj);
  for (size_t r = 0; r < 4; ++r) {
    double s = 0;
    for (size_t j = 0; j < 6; ++j) s += proj(r, j) * states(1, j);
    CHECK(q[r] == s);
  }
}

TEST_CASE("pooling identical rows ignores the weights") {
  SeededRng rng(11);
  MatrixD states(3, 6);
  const MatrixD row = testing::RandomMatrix(rng, 1, 6);
  for (size_t i = 0; i < 3; ++i) std::copy(row.row(0).begin(), row.row(0).end(), states.row(i).begin());
  const MatrixD proj = testing::RandomMatrix(rng, 4, 6);
  const double a1[] = {0.2, 0.3, 0.5};
  const double a2[] = {1, 0, 0};
  const auto q1 = PoolAndProject(states, a1, proj);
  const auto q2 = PoolAndProject(states, a2, proj);
  for (size_t r = 0; r < 4; ++r) CHECK(std::abs(q1[r] - q2[r]) < 1e-14);
}

TEST_CASE("pooling matches direct computation") {
  SeededRng rng(12);
  const MatrixD states = testing::RandomMatrix(rng, 5, 6);
  const MatrixD proj = testing::RandomMatrix(rng, 4, 6);
  std::vector<double> alpha(5);
  for (double &a : alpha) a = rng.Uniform();
  const auto q = PoolAndProject(states, alpha, proj);
  for (size_t r = 0; r < 4; ++r) {
    long double s = 0;
    for (size_t j = 0; j < 6; ++j) {
      long double pooled = 0;
      for (size_t i = 0; i < 5; ++i) pooled += alpha[i] * states(i, j);
      s += proj(r, j) * pooled;
    }
    CHECK(std::abs(q[r] - static_cast<double>(s)) < 1e-12);
  }
}

TEST_CASE("pooling rejects mismatched weights") {
  const double alpha[] = {0.5, 0.5};
  try {
    PoolAndProject(MatrixD(3, 4), alpha, MatrixD(2, 4));
    FAIL("expected DimensionMismatch");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
}

TEST_CASE("encoder composes embedding, BiLSTM, attention and projection") {
  const EnhancedEncoder enc = MakeEncoder(13);
  SeededRng rng(13);
  const TokenizedQuery q = testing::RandomQuery(rng, kVocab, 4, 0, 0);
  MatrixD x(4, 16);
  for (size_t t = 0; t < 4; ++t) {
    std::copy(enc.word_emb().row(q.basic_tokens[t]).begin(), enc.word_emb().row(q.basic_tokens[t]).end(),
              x.row(t).begin());
  }
  const MatrixD h = BiLstmForward(enc.lstm(), x);
  const auto alpha = AttentionWeights(enc.attention(), h);
  const auto expected = PoolAndProject(h, alpha, enc.projection());
  const EncodedStates states = enc.EncodeStates(q);
  CHECK(states.states == h);
  CHECK(states.alpha == alpha);
  CHECK(states.query == expected);
  CHECK(enc.Encode(q) == expected);
}

TEST_CASE("forget gate bias starts at one") {
  const EnhancedEncoder enc = MakeEncoder(14);
  const size_t m = enc.lstm().hidden();
  for (const LstmCellParams *cell : {&enc.lstm().forward, &enc.lstm().backward}) {
    for (size_t u = 0; u < m; ++u) CHECK(cell->bias(0, m + u) == 1.0);
  }
}

TEST_CASE("zero parameters give a zero query vector") {
  EnhancedEncoder enc = MakeEncoder(15);
  for (const TensorRef &t : enc.Tensors()) t.value->Fill(0.0);
  SeededRng rng(15);
  const EncodedStates s = enc.EncodeStates(testing::RandomQuery(rng, kVocab, 4, 0, 0));
  for (double v : s.states.values()) CHECK(v == 0.0);
  for (double v : s.query) CHECK(v == 0.0);
}

TEST_CASE("the enhanced model is order sensitive") {
  bool found = false;
  for (uint64_t seed = 0; seed < 5 && !found; ++seed) {
    const EnhancedEncoder enc = MakeEncoder(seed);
    TokenizedQuery ab;
    ab.basic_tokens = {5, 9};
    ab.semantic_tokens = ab.basic_tokens;
    TokenizedQuery ba = ab;
    std::swap(ba.basic_tokens[0], ba.basic_tokens[1]);
    const auto qa = enc.Encode(ab), qb = enc.Encode(ba);
    double diff = 0;
    for (size_t j = 0; j < qa.size(); ++j) diff += (qa[j] - qb[j]) * (qa[j] - qb[j]);
    found = std::sqrt(diff) > 1e-6;
  }
  CHECK(found);
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
  EnhancedEncoder enc = MakeEncoder(16);
  SeededRng rng(16);
  const auto batch = RandomBatch(rng, 3);
  MatrixD out;
  auto cache = enc.Forward(testing::Pointers(batch), Mode::kTrain, out);
  auto tensors = enc.Tensors();
  GradientBuffer grads(tensors);
  enc.Backward(*cache, MatrixD(out.rows(), out.cols()), grads);
  for (size_t i = 0; i < grads.size(); ++i) {
    for (double g : grads[i].values()) CHECK(g == 0.0);
  }
}

TEST_CASE("BPTT gradients match finite differences") {
  SeededRng rng(17);
  SUBCASE("n = 3, m = 4, k = 3") {
    EnhancedEncoder enc = MakeEncoder(17, Config(16, 4, 3));
    std::vector<TokenizedQuery> batch = {testing::RandomQuery(rng, kVocab, 3, 0, 0)};
    CHECK(testing::EncoderGradError(enc, batch, Mode::kTrain, rng) < 1e-4);
  }
  SUBCASE("a batch of mixed lengths") {
    EnhancedEncoder enc = MakeEncoder(18);
    CHECK(testing::EncoderGradError(enc, RandomBatch(rng, 3), Mode::kTrain, rng) < 1e-4);
  }
  SUBCASE("n = max_len") {
    EnhancedEncoder enc = MakeEncoder(19, Config(8, 4, 3));
    std::vector<TokenizedQuery> batch = {
        testing::RandomQuery(rng, kVocab, kDefaultMaxLen, 0, 0)};
    CHECK(testing::EncoderGradError(enc, batch, Mode::kTrain, rng) < 1e-4);
  }
}

TEST_CASE("backward after a parameter update reports a stale cache") {
  EnhancedEncoder enc = MakeEncoder(20);
  SeededRng rng(20);
  const auto batch = RandomBatch(rng, 2);
  MatrixD out;
  auto cache = enc.Forward(testing::Pointers(batch), Mode::kTrain, out);
  enc.BumpVersion();
  auto tensors = enc.Tensors();
  GradientBuffer grads(tensors);
  try {
    enc.Backward(*cache, out, grads);
    FAIL("expected StaleActivationCache");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kStaleActivationCache);
  }
}

TEST_CASE("enhanced checkpoints round trip") {
  SeededRng rng(21);
  Model model;
  model.encoder = std::make_unique<EnhancedEncoder>(MakeEncoder(21));
  model.entity_table = testing::RandomMatrix(rng, 5, 16);
  testing::TempDir dir("enh");
  SaveCheckpoint(model, dir.File("m.ckpt"));
  const Model loaded = LoadCheckpoint(dir.File("m.ckpt"));
  CHECK(loaded.kind() == EncoderKind::kEnhanced);
  const TokenizedQuery q = testing::RandomQuery(rng, kVocab, 4, 0, 0);
  CHECK(loaded.encoder->Encode(q) == model.encoder->Encode(q));
  SaveCheckpoint(loaded, dir.File("again.ckpt"));
  CHECK(ReadFile(dir.File("m.ckpt")) == ReadFile(dir.File("again.ckpt")));
}

}  // namespace
}  // namespace entrec
