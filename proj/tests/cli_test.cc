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

#include <filesystem>

#include "entrec/cli.h"
#include "entrec/errors.h"
#include "entrec/io.h"
#include "entrec/model.h"
#include "test_util.h"

namespace entrec {
namespace {

using Args = std::vector<std::string>;

// Small enough to run the whole pipeline in a few seconds.
const char *kDeskConfig = R"({
  "synth": {"num_entities": 20, "queries_per_entity": 3},
  "vocab": {"num_buckets": 512},
  "train": {"embed_dim": 8, "lstm_hidden": 6, "attention": 4, "epochs": 2,
            "negatives": 5, "batch_size": 16},
  "index": {"num_clusters": 4, "probes": 2}
})";

Args With(const testing::TempDir &dir, const std::string &config, Args tail) {
  Args args = {"--seed", "17", "--config", config, "--out-dir", dir.path().string()};
  args.insert(args.end(), tail.begin(), tail.end());
  return args;
}

TEST_CASE("config merging rejects unknown keys and wrong types") {
  nlohmann::json config = DefaultConfig();
  CHECK_NOTHROW(MergeConfig(config, nlohmann::json::parse(R"({"train": {"epochs": 3}})")));
  CHECK(config["train"]["epochs"] == 3);
  for (const char *bad : {R"({"train": {"epoch": 3}})", R"({"nosuch": {}})",
                          R"({"train": {"epochs": "three"}})"}) {
    nlohmann::json c = DefaultConfig();
    try {
      MergeConfig(c, nlohmann::json::parse(bad));
      FAIL("expected ConfigInvalid");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::kConfigInvalid);
    }
  }
  ApplyOverride(config, "train.learning_rate=0.5");
  CHECK(config["train"]["learning_rate"] == 0.5);
  ApplyOverride(config, "serve.host=0.0.0.0");
  CHECK(config["serve"]["host"] == "0.0.0.0");
  CHECK_THROWS_AS(ApplyOverride(config, "train.nope=1"), Error);
  CHECK_THROWS_AS(ApplyOverride(config, "missing_equals"), Error);
}

TEST_CASE("config hash depends on config and seed only") {
  const nlohmann::json a = DefaultConfig();
  nlohmann::json b = DefaultConfig();
  CHECK(ConfigHash(a, 1) == ConfigHash(b, 1));
  CHECK(ConfigHash(a, 1) != ConfigHash(a, 2));
  b["train"]["epochs"] = 9;
  CHECK(ConfigHash(a, 1) != ConfigHash(b, 1));
}

TEST_CASE("exit codes separate validation errors from runtime failures") {
  testing::TempDir dir("cli_exit");
  WriteFile(dir.File("desk.json"), kDeskConfig);
  WriteFile(dir.File("bad.json"), R"({"train": {"epochz": 1}})");
  CHECK(RunCli({"synth"}) == 1);  // --seed is mandatory
  CHECK(RunCli({"--seed", "1", "frobnicate"}) == 1);
  CHECK(RunCli(With(dir, dir.File("bad.json"), {"synth"})) == 1);
  CHECK(RunCli(With(dir, dir.File("desk.json"), {"build-data"})) == 1);  // no world yet
  CHECK(RunCli(With(dir, dir.File("desk.json"), {"--set", "train.sampler=\"zipf\"", "synth"})) ==
        0);

  // An out-dir beneath a regular file cannot be created: a runtime failure.
  WriteFile(dir.File("plain"), "x");
  CHECK(RunCli({"--seed", "1", "--out-dir", dir.File("plain") + "/sub", "synth"}) == 2);
  // A pair file with a non-positive weight fails validation.
  WriteFile(dir.File("pairs.tsv"), "alpha beta\tE1\t0\n");
  CHECK(RunCli(With(dir, dir.File("desk.json"), {"build-vocab"})) == 1);
}

std::vector<const MatrixD *> Values(Model &model) {
  std::vector<const MatrixD *> out;
  for (const TensorRef &t : model.encoder->Tensors()) out.push_back(t.value);
  out.push_back(&model.entity_table);
  return out;
}

TEST_CASE("training with learning rate zero keeps the initial parameters") {
  testing::TempDir dir("cli_lr0");
  WriteFile(dir.File("desk.json"), kDeskConfig);
  const std::string config = dir.File("desk.json");
  REQUIRE(RunCli(With(dir, config, {"synth"})) == 0);
  REQUIRE(RunCli(With(dir, config, {"build-data"})) == 0);
  REQUIRE(RunCli(With(dir, config, {"build-vocab"})) == 0);
  const Args common = {"--set", "train.methods=[\"att_bilstm\"]", "--set",
                       "train.learning_rate=0"};
  Args init = common;
  init.insert(init.end(), {"--set", "train.epochs=0", "train"});
  REQUIRE(RunCli(With(dir, config, init)) == 0);
  Model initial = LoadCheckpoint(dir.File("att_bilstm.ckpt"));
  Args trained = common;
  trained.push_back("train");
  REQUIRE(RunCli(With(dir, config, trained)) == 0);
  Model after = LoadCheckpoint(dir.File("att_bilstm.ckpt"));
  const auto a = Values(initial);
  const auto b = Values(after);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == *b[i]);
  CHECK(after.step > 0);
}

std::string RunPipeline(const testing::TempDir &dir) {
  WriteFile(dir.File("desk.json"), kDeskConfig);
  const std::string config = dir.File("desk.json");
  for (const char *cmd : {"synth", "build-data", "build-vocab", "train", "build-index", "eval"}) {
    REQUIRE(RunCli(With(dir, config, {"--threads", "2", cmd})) == 0);
  }
  return ReadFile(dir.File("eval_report.json"));
}

TEST_CASE("the full pipeline is reproducible from config and seed") {
  testing::TempDir a("cli_pipe_a"), b("cli_pipe_b");
  const std::string report = RunPipeline(a);
  CHECK(report == RunPipeline(b));
  const auto json = nlohmann::json::parse(report);
  CHECK(json.at("methods").size() == 3);
  CHECK(json.at("case_count").get<size_t>() > 0);
  for (const char *file : {"pairs.tsv", "vocab.json", "dnn.ckpt", "ngram.index",
                           "att_bilstm.ckpt", "eval_report.txt"}) {
    CHECK(HashFile(a.File(file)) == HashFile(b.File(file)));
  }
  const auto echo = nlohmann::json::parse(ReadFile(a.File("config.eval.json")));
  CHECK(echo.at("config_hash") == json.at("config_hash"));
  CHECK(echo.at("seed") == 17);

  CHECK(RunCli(With(a, a.File("desk.json"), {"neighbors", "--method", "dnn", "--entity",
                                              "no such entity"})) == 1);
  CHECK(RunCli(With(a, a.File("desk.json"), {"attend", "--method", "att_bilstm", "--query",
                                              "anything at all"})) == 0);
}

}  // namespace
}  // namespace entrec
