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
#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "entrec/entity_index.h"
#include "entrec/errors.h"
#include "entrec/io.h"
#include "entrec/service.h"
#include "entrec/trainer.h"
#include "test_util.h"

namespace entrec {
namespace {

std::vector<std::string> Names(size_t n) {
  std::vector<std::string> names;
  for (size_t i = 0; i < n; ++i) names.push_back("e" + std::to_string(i));
  return names;
}

std::vector<int32_t> Ids(const std::vector<ScoredEntity> &results) {
  std::vector<int32_t> ids;
  for (const auto &r : results) ids.push_back(r.id);
  return ids;
}

struct Oracle {
  std::vector<double> by_id;
  std::vector<double> sorted;  // descending
};

// Brute-force cosine scores in long double.
Oracle OracleScores(const MatrixD &table, std::span<const double> q) {
  Oracle o;
  long double qn = 0;
  for (double x : q) qn += static_cast<long double>(x) * x;
  for (size_t j = 0; j < table.rows(); ++j) {
    long double dot = 0, n = 0;
    for (size_t c = 0; c < q.size(); ++c) {
      dot += static_cast<long double>(q[c]) * table(j, c);
      n += static_cast<long double>(table(j, c)) * table(j, c);
    }
    o.by_id.push_back(static_cast<double>(dot / std::sqrt(n * qn)));
  }
  o.sorted = o.by_id;
  std::sort(o.sorted.begin(), o.sorted.end(), std::greater<>());
  return o;
}

TEST_CASE("rows are L2-normalised at build") {
  MatrixD table(2, 4);
  table(0, 0) = 3;
  table(0, 1) = 4;
  table(1, 2) = 1;
  const EntityIndex index = EntityIndex::Build(table, Names(2), {});
  CHECK(index.rows()(0, 0) == doctest::Approx(0.6f));
  CHECK(index.rows()(0, 1) == doctest::Approx(0.8f));
  CHECK(index.rows()(0, 2) == 0.0f);
  CHECK(index.rows()(1, 2) == 1.0f);
  SeededRng rng(1);
  const EntityIndex big = EntityIndex::Build(testing::RandomMatrix(rng, 100, 16), Names(100), {});
  for (size_t j = 0; j < big.size(); ++j) {
    double n = 0;
    for (float x : big.rows().row(j)) n += static_cast<double>(x) * x;
    CHECK(std::abs(std::sqrt(n) - 1) < 1e-5);
  }
}

TEST_CASE("zero rows are rejected with their names") {
  MatrixD table(3, 2);
  table(1, 0) = 1;
  try {
    EntityIndex::Build(table, {"alpha", "beta", "gamma"}, {});
    FAIL("expected ZeroNormEntity");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kZeroNormEntity);
    const std::string msg = e.what();
    CHECK(msg.find("alpha") != std::string::npos);
    CHECK(msg.find("gamma") != std::string::npos);
    CHECK(msg.find("beta") == std::string::npos);
  }
}

TEST_CASE("three hand-set vectors rank by hand-computed cosine") {
  // q = (1, 0). Cosines: e0 (1,1) -> 0.7071, e1 (0,2) -> 0, e2 (3,-1) -> 0.9487.
  MatrixD table(3, 2);
  table(0, 0) = 1;
  table(0, 1) = 1;
  table(1, 1) = 2;
  table(2, 0) = 3;
  table(2, 1) = -1;
  const EntityIndex index = EntityIndex::Build(table, Names(3), {});
  const std::vector<double> q = {2.0, 0.0};
  const auto r = index.TopKExact(std::span<const double>(q), 3);
  CHECK(Ids(r) == std::vector<int32_t>{2, 0, 1});
  CHECK(r[0].score == doctest::Approx(3 / std::sqrt(10.0)).epsilon(1e-6));
  CHECK(r[1].score == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-6));
  CHECK(std::abs(r[2].score) < 1e-7);
  CHECK(r[0].name == "e2");
}

TEST_CASE("a query equal to a row ranks that row first with score one") {
  SeededRng rng(2);
  const MatrixD table = testing::RandomMatrix(rng, 40, 8);
  const EntityIndex index = EntityIndex::Build(table, Names(40), {});
  for (size_t i = 0; i < 40; i += 7) {
    const auto r = index.TopKExact(table.row(i), 1);
    CHECK(r[0].id == static_cast<int32_t>(i));
    CHECK(r[0].score == doctest::Approx(1.0f).epsilon(1e-6));
  }
}

TEST_CASE("exact top-K matches a brute-force oracle on random instances") {
  SeededRng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 1 + rng.UniformInt(60), d = 1 + rng.UniformInt(12);
    MatrixD table = testing::RandomMatrix(rng, n, d);
    // Duplicate rows create exact ties.
    for (size_t j = 1; j < n; j += 3) {
      for (size_t c = 0; c < d; ++c) table(j, c) = table(j - 1, c);
    }
    const EntityIndex index = EntityIndex::Build(table, Names(n), {});
    const MatrixD q = testing::RandomMatrix(rng, 1, d);
    const size_t k = 1 + rng.UniformInt(n + 5);
    const auto r = index.TopKExact(q.row(0), k);
    CHECK(r.size() == std::min(k, n));
    for (size_t i = 1; i < r.size(); ++i) {
      CHECK((r[i - 1].score > r[i].score ||
             (r[i - 1].score == r[i].score && r[i - 1].id < r[i].id)));
    }
    // Float rounding may reorder near-ties, so compare score sequences and
    // each returned entity's own oracle score.
    const auto oracle = OracleScores(table, q.row(0));
    for (size_t i = 0; i < r.size(); ++i) {
      CHECK(std::abs(r[i].score - oracle.sorted[i]) < 1e-5);
      CHECK(std::abs(r[i].score - oracle.by_id[r[i].id]) < 1e-5);
    }
  }
}

TEST_CASE("K equal to the index size returns a permutation; larger K clamps") {
  SeededRng rng(4);
  const EntityIndex index = EntityIndex::Build(testing::RandomMatrix(rng, 25, 5), Names(25), {});
  const MatrixD q = testing::RandomMatrix(rng, 1, 5);
  auto ids = Ids(index.TopKExact(q.row(0), 25));
  std::sort(ids.begin(), ids.end());
  for (int32_t i = 0; i < 25; ++i) CHECK(ids[i] == i);
  CHECK(index.TopKExact(q.row(0), 1000).size() == 25);
}

TEST_CASE("approximate search needs clusters") {
  SeededRng rng(5);
  const EntityIndex index = EntityIndex::Build(testing::RandomMatrix(rng, 10, 4), Names(10), {});
  const std::vector<float> q(4, 1.0f);
  try {
    index.TopKApprox(q, 3, 1);
    FAIL("expected IndexNotClustered");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kIndexNotClustered);
  }
}

TEST_CASE("probing every cluster or using one cluster equals exact search") {
  SeededRng rng(6);
  const MatrixD table = testing::RandomMatrix(rng, 2000, 16);
  for (size_t clusters : {1, 16}) {
    EntityIndex index = EntityIndex::Build(table, Names(2000), {});
    index.BuildClusters({clusters, 5, 256, 7, 1});
    CHECK(index.num_clusters() == clusters);
    for (int t = 0; t < 20; ++t) {
      const MatrixD q = testing::RandomMatrix(rng, 1, 16);
      const std::vector<float> qf(q.row(0).begin(), q.row(0).end());
      CHECK(Ids(index.TopKApprox(qf, 50, clusters)) ==
            Ids(index.TopKExact(std::span<const float>(qf), 50)));
    }
  }
}

TEST_CASE("approximate recall is monotone in probes and stays inside the index") {
  SeededRng rng(7);
  const MatrixD table = testing::RandomMatrix(rng, 3000, 16);
  EntityIndex index = EntityIndex::Build(table, Names(3000), {});
  index.BuildClusters({32, 8, 256, 3, 2});
  for (int t = 0; t < 10; ++t) {
    const MatrixD q = testing::RandomMatrix(rng, 1, 16);
    const std::vector<float> qf(q.row(0).begin(), q.row(0).end());
    const auto exact = Ids(index.TopKExact(std::span<const float>(qf), 20));
    const std::set<int32_t> truth(exact.begin(), exact.end());
    size_t previous = 0;
    for (size_t probes = 1; probes <= 32; probes *= 2) {
      size_t hits = 0;
      for (const auto &r : index.TopKApprox(qf, 20, probes)) {
        CHECK(r.id >= 0);
        CHECK(r.id < 3000);
        hits += truth.count(r.id);
      }
      CHECK(hits >= previous);
      previous = hits;
    }
    CHECK(previous == 20);
  }
}

TEST_CASE("neighbors exclude the entity and scores are symmetric") {
  // Hand case: e0 (1,0), e1 (1,1), e2 (0,1). From e0: e1 0.7071, e2 0.
  MatrixD table(3, 2);
  table(0, 0) = 1;
  table(1, 0) = 1;
  table(1, 1) = 1;
  table(2, 1) = 1;
  const EntityIndex hand = EntityIndex::Build(table, Names(3), {});
  const auto n0 = hand.Neighbors("e0", 5);
  CHECK(Ids(n0) == std::vector<int32_t>{1, 2});
  CHECK(n0[0].score == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-6));

  SeededRng rng(8);
  const EntityIndex index = EntityIndex::Build(testing::RandomMatrix(rng, 30, 6), Names(30), {});
  for (size_t a = 0; a < 30; ++a) {
    const auto na = index.Neighbors("e" + std::to_string(a), 29);
    CHECK(na.size() == 29);
    for (const auto &r : na) {
      CHECK(r.id != static_cast<int32_t>(a));
      for (const auto &back : index.Neighbors(r.name, 29)) {
        if (back.id == static_cast<int32_t>(a)) CHECK(std::abs(back.score - r.score) < 1e-6);
      }
    }
  }
  try {
    index.Neighbors("nobody", 3);
    FAIL("expected BadFormat");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kBadFormat);
  }
}

std::vector<ScoredEntity> Ranked(const std::vector<std::string> &names) {
  std::vector<ScoredEntity> out;
  for (size_t i = 0; i < names.size(); ++i) {
    out.push_back({static_cast<int32_t>(i), names[i], 1.0f - 0.1f * static_cast<float>(i)});
  }
  return out;
}

TEST_CASE("concept grouping") {
  const auto results = Ranked({"a", "b", "c", "d", "e"});
  SUBCASE("empty concept map gives one other group") {
    const auto groups = GroupByConcept(results, {});
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].concept_name == kOtherConcept);
    CHECK(Ids(groups[0].members) == Ids(results));
  }
  SUBCASE("interleaved concepts are ordered by best member") {
    const ConceptMap concepts = {{"a", {"x"}}, {"b", {"y"}}, {"c", {"x"}}, {"d", {"y"}}};
    const auto groups = GroupByConcept(results, concepts);
    REQUIRE(groups.size() == 3);
    CHECK(groups[0].concept_name == "x");
    CHECK(Ids(groups[0].members) == std::vector<int32_t>{0, 2});
    CHECK(groups[1].concept_name == "y");
    CHECK(Ids(groups[1].members) == std::vector<int32_t>{1, 3});
    CHECK(groups[2].concept_name == kOtherConcept);
    CHECK(Ids(groups[2].members) == std::vector<int32_t>{4});
  }
  SUBCASE("multi-concept entities join their highest-ranked concept") {
    const ConceptMap concepts = {{"a", {"x"}}, {"b", {"y"}}, {"c", {"y", "x"}}};
    const auto groups = GroupByConcept(results, concepts);
    CHECK(groups[0].concept_name == "x");
    CHECK(Ids(groups[0].members) == std::vector<int32_t>{0, 2});
  }
  SUBCASE("a single concept keeps input order") {
    ConceptMap concepts;
    for (const auto &r : results) concepts[r.name] = {"z"};
    const auto groups = GroupByConcept(results, concepts);
    REQUIRE(groups.size() == 1);
    CHECK(Ids(groups[0].members) == Ids(results));
  }
}

TEST_CASE("concept grouping is a partition") {
  SeededRng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> names = Names(1 + rng.UniformInt(20));
    ConceptMap concepts;
    for (const auto &n : names) {
      const size_t count = rng.UniformInt(3);
      for (size_t c = 0; c < count; ++c) {
        concepts[n].push_back("c" + std::to_string(rng.UniformInt(4)));
      }
      if (count == 0 && rng.Bernoulli(0.5)) concepts.erase(n);
    }
    const auto results = Ranked(names);
    std::multiset<int32_t> seen;
    for (const auto &g : GroupByConcept(results, concepts)) {
      CHECK(!g.members.empty());
      for (size_t i = 1; i < g.members.size(); ++i) CHECK(g.members[i - 1].id < g.members[i].id);
      for (const auto &m : g.members) seen.insert(m.id);
    }
    CHECK(seen.size() == results.size());
    CHECK(std::set<int32_t>(seen.begin(), seen.end()).size() == results.size());
  }
}

TEST_CASE("index files round-trip and rebuilds are byte-identical") {
  SeededRng rng(10);
  const MatrixD table = testing::RandomMatrix(rng, 300, 8);
  const ConceptMap concepts = {{"e1", {"x", "y"}}, {"e7", {"z"}}};
  const IndexMetadata meta{EncoderKind::kEnhanced, 0xabcdefULL, "build-1"};
  auto build = [&] {
    EntityIndex index = EntityIndex::Build(table, Names(300), meta, concepts);
    index.BuildClusters({8, 5, 256, 4, 2});
    return index;
  };
  const EntityIndex a = build();
  CHECK(a.Serialize() == build().Serialize());
  testing::TempDir dir("index");
  a.Save(dir.File("x.index"));
  const EntityIndex b = EntityIndex::Load(dir.File("x.index"));
  CHECK(b.Serialize() == a.Serialize());
  CHECK(b.metadata().checkpoint_hash == 0xabcdefULL);
  CHECK(b.concepts().at("e1") == std::vector<std::string>{"x", "y"});
  const std::vector<float> q(8, 0.5f);
  CHECK(Ids(b.TopKApprox(q, 10, 2)) == Ids(a.TopKApprox(q, 10, 2)));
  WriteFile(dir.File("bad.index"), a.Serialize().substr(0, 100));
  CHECK_THROWS_AS(EntityIndex::Load(dir.File("bad.index")), Error);
}

TEST_CASE("concept files parse entity and concept lists") {
  testing::TempDir dir("concepts");
  WriteFile(dir.File("c.tsv"), "apple\tfruit;company\npear\tfruit\n");
  const ConceptMap m = LoadConceptMap(dir.File("c.tsv"));
  CHECK(m.at("apple") == std::vector<std::string>{"fruit", "company"});
  CHECK(m.at("pear") == std::vector<std::string>{"fruit"});
}

struct ServiceFixture {
  Vocabulary vocab;
  Model model;
  EntityIndex index;

  ServiceFixture() {
    std::vector<QueryEntityRecord> records;
    for (int e = 0; e < 12; ++e) {
      records.push_back({"word" + std::to_string(e) + " shared", "E" + std::to_string(e), 1});
    }
    vocab = BuildVocab(records, Segmenter(), 1);
    TrainConfig config;
    config.model.encoder = EncoderKind::kEnhanced;
    config.model.embed_dim = 8;
    config.model.lstm_hidden = 4;
    config.model.attention = 3;
    config.model.tokenizer.num_buckets = 32;
    config.seed = 5;
    model = InitializeModel(config, vocab);
    index = EntityIndex::Build(model.entity_table, vocab.entities(),
                               {EncoderKind::kEnhanced, 77, "t"},
                               {{"E0", {"first"}}, {"E1", {"first"}}});
  }
};

TEST_CASE("service handlers answer recommend, similar and health") {
  ServiceFixture f;
  ServeOptions options;
  options.default_k = 5;
  const RecommendService service(std::move(f.model), f.vocab, Segmenter(), f.index, 77, 99,
                                 options);
  const auto r = service.Recommend("word3 shared", std::nullopt, false);
  CHECK(r.status == 200);
  CHECK(r.body.at("results").size() == 5);
  CHECK(r.body.at("embed_ms").get<double>() >= 0);
  CHECK(r.body.at("retrieve_ms").get<double>() >= 0);
  const auto g = service.Recommend("word3 shared", 12, true);
  CHECK(g.body.at("results").size() == 12);
  for (const auto &item : g.body.at("results")) CHECK(item.contains("concept"));
  CHECK(service.Recommend("   ", 3, false).status == 400);
  CHECK(service.Similar("E2", 3).body.at("results").size() == 3);
  CHECK(service.Similar("nobody", 3).status == 404);
  const auto h = service.Health().body;
  CHECK(h.at("status") == "ok");
  CHECK(h.at("vocab_size") == f.vocab.word_count());
  CHECK(h.at("entity_count") == 12);
}

TEST_CASE("service startup fails on checkpoint mismatch") {
  ServiceFixture f;
  try {
    RecommendService(std::move(f.model), f.vocab, Segmenter(), f.index, 78, 99);
    FAIL("expected HashMismatch");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kHashMismatch);
  }
  ServiceFixture g;
  const EntityIndex base_index = EntityIndex::Build(g.model.entity_table, g.vocab.entities(),
                                                    {EncoderKind::kBase, 77, "t"});
  CHECK_THROWS_AS(RecommendService(std::move(g.model), g.vocab, Segmenter(), base_index, 77, 99),
                  Error);
}

TEST_CASE("HTTP endpoints round-trip") {
  ServiceFixture f;
  ServeOptions options;
  options.threads = 2;
  RecommendService service(std::move(f.model), f.vocab, Segmenter(), f.index, 77, 99, options);
  const int port = service.BindToAnyPort("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server([&] { service.ListenAfterBind(); });
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/recommend?q=word1%20shared&k=3");
  REQUIRE(res);
  CHECK(res->status == 200);
  const auto body = nlohmann::json::parse(res->body);
  CHECK(body.at("query") == "word1 shared");
  CHECK(body.at("results").size() == 3);
  res = client.Get("/recommend?q=word1&k=zero");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = client.Get("/similar?entity=E4&n=2");
  REQUIRE(res);
  CHECK(nlohmann::json::parse(res->body).at("results").size() == 2);
  res = client.Get("/healthz");
  REQUIRE(res);
  CHECK(nlohmann::json::parse(res->body).at("status") == "ok");
  service.Stop();
  server.join();
}

}  // namespace
}  // namespace entrec
