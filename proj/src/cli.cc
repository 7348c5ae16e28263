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

#include "entrec/cli.h"

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "entrec/datapipe.h"
#include "entrec/entity_index.h"
#include "entrec/errors.h"
#include "entrec/eval.h"
#include "entrec/hash.h"
#include "entrec/io.h"
#include "entrec/model.h"
#include "entrec/service.h"
#include "entrec/synth.h"
#include "entrec/trainer.h"

namespace entrec {
namespace fs = std::filesystem;
using nlohmann::json;

json DefaultConfig() {
  return json::parse(R"({
    "synth": {
      "num_entities": 50, "num_concepts": 5, "keywords_per_entity": 3,
      "queries_per_entity": 4, "filler_words": 40, "fillers_per_query": 2,
      "eval_queries_per_entity": 1
    },
    "data": {
      "input_dir": "", "entity_dict": "entities.txt", "click_log": "click_log.tsv",
      "doc_log": "doc_log.tsv", "related_log": "related_log.tsv",
      "tag_rules": "tag_rules.tsv", "tag_queries": "tag_queries.txt",
      "blacklist": "blacklist.txt", "quality_scores": "",
      "ctr_threshold": 0.1, "min_doc_clicks": 1, "quality_threshold": 0.0,
      "min_entity_count": 2, "subsample_t": 0.05
    },
    "vocab": {
      "pairs": "", "phrases": "", "min_count": 1, "pretokenized": false,
      "max_len": 32, "num_buckets": 65536, "ngram_orders": [2, 3]
    },
    "train": {
      "methods": ["dnn", "ngram", "att_bilstm"], "embed_dim": 128,
      "lstm_hidden": 128, "attention": 64, "batch_size": 32, "negatives": 20,
      "epochs": 5, "learning_rate": 0.001, "sampler": "log_uniform",
      "logit_correction": true
    },
    "index": {"num_clusters": 256, "iterations": 10, "probes": 8, "concepts": ""},
    "eval": {"cases": "", "ms": [1, 10, 20, 30]},
    "serve": {
      "method": "att_bilstm", "host": "127.0.0.1", "port": 8080, "approx": true,
      "default_k": 10, "threads": 8
    }
  })");
}

namespace {

bool SameType(const json &a, const json &b) {
  if (a.is_number() && b.is_number()) {
    // Integers may not be replaced by fractions.
    return !(a.is_number_integer() && b.is_number_float());
  }
  return a.type() == b.type();
}

}  // namespace

void MergeConfig(json &base, const json &user, const std::string &where) {
  if (!user.is_object()) {
    throw Error(ErrorCode::kConfigInvalid, (where.empty() ? "config" : where) + " must be an object");
  }
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw Error(ErrorCode::kConfigInvalid, "unknown config key '" + key + "'");
    json &slot = base[it.key()];
    if (slot.is_object()) {
      MergeConfig(slot, it.value(), key);
    } else if (!SameType(slot, it.value())) {
      throw Error(ErrorCode::kConfigInvalid, "config key '" + key + "' expects " +
                                                 std::string(slot.type_name()) + ", got " +
                                                 it.value().type_name());
    } else if (slot.is_number_float()) {
      slot = it.value().get<double>();
    } else {
      slot = it.value();
    }
  }
}

void ApplyOverride(json &config, const std::string &assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::kConfigInvalid, "override '" + assignment + "' is not key=value");
  }
  const std::vector<std::string> path = SplitOn(assignment.substr(0, eq), '.');
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json patch = value;
  for (size_t i = path.size(); i-- > 0;) patch = json{{path[i], patch}};
  MergeConfig(config, patch);
}

std::string ConfigHash(const json &config, uint64_t seed) {
  return HashHex(Fnv1a64(json{{"config", config}, {"seed", seed}}.dump()));
}

namespace {

struct Context {
  json config;
  uint64_t seed = 0;
  size_t threads = 1;
  fs::path out_dir;
  std::string config_hash;
  std::string command;

  const json &section(const char *name) const { return config.at(name); }
  std::string Out(const std::string &name) const { return (out_dir / name).string(); }
  fs::path WorldDir() const {
    const std::string dir = section("data").at("input_dir");
    return dir.empty() ? out_dir / "world" : fs::path(dir);
  }
  // Explicit path from the config, or `fallback` under out_dir.
  std::string PathOr(const char *sect, const char *key, const fs::path &fallback) const {
    const std::string value = section(sect).at(key);
    return value.empty() ? fallback.string() : value;
  }
  std::string PhrasesPath() const {
    const std::string path = PathOr("vocab", "phrases", WorldDir() / "phrases.txt");
    return fs::exists(path) ? path : "";
  }
};

struct Method {
  std::string name;
  EncoderKind encoder;
  bool use_ngrams;
};

Method ResolveMethod(const std::string &name) {
  if (name == "dnn") return {name, EncoderKind::kBase, false};
  if (name == "ngram") return {name, EncoderKind::kBase, true};
  if (name == "att_bilstm") return {name, EncoderKind::kEnhanced, false};
  throw Error(ErrorCode::kConfigInvalid, "unknown method '" + name + "' (dnn, ngram, att_bilstm)");
}

std::vector<Method> Methods(const Context &ctx) {
  std::vector<Method> out;
  for (const std::string &name : ctx.section("train").at("methods").get<std::vector<std::string>>()) {
    out.push_back(ResolveMethod(name));
  }
  if (out.empty()) throw Error(ErrorCode::kConfigInvalid, "train.methods is empty");
  return out;
}

void RequireInput(const std::string &path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kInputMissing, "missing input " + path);
}

// Echoes the effective configuration next to the command's outputs.
void EchoConfig(const Context &ctx) {
  const json echo = {{"command", ctx.command},
                     {"seed", ctx.seed},
                     {"config_hash", ctx.config_hash},
                     {"config", ctx.config}};
  WriteFile(ctx.Out("config." + ctx.command + ".json"), echo.dump(2) + "\n");
}

Segmenter LoadSegmenter(const Context &ctx) {
  const std::string path = ctx.PhrasesPath();
  if (path.empty()) return Segmenter();
  const std::vector<std::string> phrases = LoadLineList(path);
  return Segmenter(phrases);
}

TokenizerOptions TokenizerFromConfig(const Context &ctx) {
  const json &v = ctx.section("vocab");
  TokenizerOptions options;
  options.max_len = v.at("max_len");
  options.num_buckets = v.at("num_buckets");
  options.ngram_orders = v.at("ngram_orders").get<std::vector<int>>();
  options.pretokenized = v.at("pretokenized");
  return options;
}

Vocabulary LoadVocab(const Context &ctx) {
  const std::string path = ctx.Out("vocab.json");
  RequireInput(path);
  return Vocabulary::Load(path);
}

struct LoadedMethod {
  Model model;
  uint64_t checkpoint_hash = 0;
};

LoadedMethod LoadMethodCheckpoint(const Context &ctx, const std::string &method,
                                  const Vocabulary &vocab) {
  const std::string path = ctx.Out(method + ".ckpt");
  RequireInput(path);
  LoadedMethod loaded{LoadCheckpoint(path), HashFile(path)};
  if (loaded.model.vocab_hash != vocab.Hash()) {
    throw Error(ErrorCode::kHashMismatch, path + " was trained against a different vocabulary");
  }
  return loaded;
}

EntityIndex LoadMethodIndex(const Context &ctx, const std::string &method) {
  const std::string path = ctx.Out(method + ".index");
  RequireInput(path);
  return EntityIndex::Load(path);
}

int CmdSynth(const Context &ctx) {
  const json &s = ctx.section("synth");
  SynthConfig config;
  config.num_entities = s.at("num_entities");
  config.num_concepts = s.at("num_concepts");
  config.keywords_per_entity = s.at("keywords_per_entity");
  config.queries_per_entity = s.at("queries_per_entity");
  config.filler_words = s.at("filler_words");
  config.fillers_per_query = s.at("fillers_per_query");
  config.eval_queries_per_entity = s.at("eval_queries_per_entity");
  config.seed = ctx.seed;
  const SynthWorld world = GenerateWorld(config);
  WriteWorld(world, config, ctx.WorldDir().string());
  spdlog::info("synthetic world: {} entities, {} queries, {} eval cases -> {}",
               world.entities.size(), world.queries.size(), world.eval_cases.size(),
               ctx.WorldDir().string());
  return 0;
}

int CmdBuildData(const Context &ctx) {
  const json &d = ctx.section("data");
  const fs::path dir = ctx.WorldDir();
  auto input = [&](const char *key) -> std::string {
    const std::string name = d.at(key);
    if (name.empty()) return "";
    const std::string path = (dir / name).string();
    RequireInput(path);
    return path;
  };
  DataPipelineInputs inputs;
  inputs.entity_dict = input("entity_dict");
  if (inputs.entity_dict.empty()) throw Error(ErrorCode::kConfigInvalid, "data.entity_dict is required");
  inputs.click_log = input("click_log");
  inputs.doc_log = input("doc_log");
  inputs.related_log = input("related_log");
  inputs.tag_rules = input("tag_rules");
  inputs.tag_queries = input("tag_queries");
  inputs.blacklist = input("blacklist");
  inputs.quality_scores = input("quality_scores");
  DataPipelineConfig config;
  config.ctr_threshold = d.at("ctr_threshold");
  config.min_doc_clicks = d.at("min_doc_clicks");
  config.quality_threshold = d.at("quality_threshold");
  config.min_entity_count = d.at("min_entity_count");
  config.subsample_t = d.at("subsample_t");
  config.seed = ctx.seed;
  DataPipelineReport report;
  const PairList pairs = RunDataPipeline(inputs, config, &report);
  SavePairs(pairs, ctx.Out("pairs.tsv"));
  const json summary = {{"config_hash", ctx.config_hash},
                        {"click_pairs", report.click_pairs},
                        {"doc_pairs", report.doc_pairs},
                        {"query_pairs", report.query_pairs},
                        {"tag_pairs", report.tag_pairs},
                        {"removed_low_quality", report.removed_low_quality},
                        {"removed_low_freq", report.removed_low_freq},
                        {"removed_subsample", report.removed_subsample},
                        {"output_pairs", report.output_pairs}};
  WriteFile(ctx.Out("data_report.json"), summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int CmdBuildVocab(const Context &ctx) {
  const std::string pairs_path = ctx.PathOr("vocab", "pairs", ctx.out_dir / "pairs.tsv");
  RequireInput(pairs_path);
  const PairList pairs = LoadPairs(pairs_path);
  const Segmenter segmenter = LoadSegmenter(ctx);
  const Vocabulary vocab = BuildVocab(pairs, segmenter, ctx.section("vocab").at("min_count"),
                                      ctx.section("vocab").at("pretokenized"));
  vocab.Save(ctx.Out("vocab.json"));
  spdlog::info("vocabulary: {} words, {} entities, hash {}", vocab.word_count(),
               vocab.entity_count(), HashHex(vocab.Hash()));
  return 0;
}

int CmdTrain(const Context &ctx) {
  const std::string pairs_path = ctx.PathOr("vocab", "pairs", ctx.out_dir / "pairs.tsv");
  RequireInput(pairs_path);
  const Vocabulary vocab = LoadVocab(ctx);
  const Segmenter segmenter = LoadSegmenter(ctx);
  const TokenizerOptions tok_options = TokenizerFromConfig(ctx);
  const Tokenizer tokenizer(vocab, segmenter, tok_options);
  const std::vector<TrainingPair> pairs = MakeTrainingPairs(LoadPairs(pairs_path), tokenizer);
  const json &t = ctx.section("train");
  for (const Method &method : Methods(ctx)) {
    TrainConfig config;
    config.model.encoder = method.encoder;
    config.model.use_ngrams = method.use_ngrams;
    config.model.embed_dim = t.at("embed_dim");
    config.model.lstm_hidden = t.at("lstm_hidden");
    config.model.attention = t.at("attention");
    config.model.tokenizer = tok_options;
    config.adam.learning_rate = t.at("learning_rate");
    config.batch_size = t.at("batch_size");
    config.negatives = t.at("negatives");
    config.epochs = t.at("epochs");
    config.sampler = ParseSamplerKind(t.at("sampler").get<std::string>());
    config.logit_correction = t.at("logit_correction");
    config.seed = ctx.seed;
    config.checkpoint_path = ctx.Out(method.name + ".ckpt");
    config.run_log_path = ctx.Out(method.name + ".runlog.jsonl");
    config.dump_dir = ctx.out_dir.string();
    config.config_hash = ctx.config_hash;
    config.Validate(vocab.entity_count());
    spdlog::info("training {} on {} pairs", method.name, pairs.size());
    const TrainResult result = Train(pairs, vocab, config);
    for (const EpochStats &e : result.epochs) {
      spdlog::info("{} epoch {} mean_loss {:.6f} ({:.0f} ms)", method.name, e.epoch, e.mean_loss,
                   e.wall_ms);
    }
  }
  return 0;
}

int CmdBuildIndex(const Context &ctx) {
  const Vocabulary vocab = LoadVocab(ctx);
  ConceptMap concepts;
  const std::string concept_path = ctx.PathOr("index", "concepts", ctx.WorldDir() / "concepts.tsv");
  if (fs::exists(concept_path)) concepts = LoadConceptMap(concept_path);
  const json &ix = ctx.section("index");
  for (const Method &method : Methods(ctx)) {
    LoadedMethod loaded = LoadMethodCheckpoint(ctx, method.name, vocab);
    EntityIndex index = EntityIndex::Build(
        loaded.model.entity_table, vocab.entities(),
        {loaded.model.kind(), loaded.checkpoint_hash, ctx.config_hash}, concepts);
    IvfOptions ivf;
    ivf.num_clusters = ix.at("num_clusters");
    ivf.iterations = ix.at("iterations");
    ivf.seed = ctx.seed;
    ivf.threads = ctx.threads;
    index.BuildClusters(ivf);
    const std::string path = ctx.Out(method.name + ".index");
    index.Save(path);
    spdlog::info("{}: {} entities, {} clusters, index hash {}", method.name, index.size(),
                 index.num_clusters(), HashHex(HashFile(path)));
  }
  return 0;
}

int CmdEval(const Context &ctx) {
  const Vocabulary vocab = LoadVocab(ctx);
  const Segmenter segmenter = LoadSegmenter(ctx);
  const std::string cases_path = ctx.PathOr("eval", "cases", ctx.WorldDir() / "eval_cases.tsv");
  RequireInput(cases_path);
  const std::vector<EvalCase> cases = LoadEvalCases(cases_path);
  std::vector<LoadedMethod> models;
  std::vector<EntityIndex> indexes;
  std::vector<Tokenizer> tokenizers;
  const std::vector<Method> methods = Methods(ctx);
  for (const Method &method : methods) {
    models.push_back(LoadMethodCheckpoint(ctx, method.name, vocab));
    indexes.push_back(LoadMethodIndex(ctx, method.name));
  }
  for (const LoadedMethod &m : models) tokenizers.emplace_back(vocab, segmenter, m.model.tokenizer);
  std::vector<EvalMethod> eval_methods;
  for (size_t i = 0; i < methods.size(); ++i) {
    eval_methods.push_back(
        {methods[i].name, &models[i].model, &tokenizers[i], &indexes[i], models[i].checkpoint_hash});
  }
  const std::vector<size_t> ms = ctx.section("eval").at("ms").get<std::vector<size_t>>();
  const EvalReport report = Evaluate(eval_methods, cases, ms, ctx.config_hash, ctx.threads);
  WriteFile(ctx.Out("eval_report.json"), report.ToJson().dump(2) + "\n");
  WriteFile(ctx.Out("eval_report.txt"), report.ToTable());
  std::cout << report.ToTable();
  return 0;
}

int CmdServe(const Context &ctx) {
  const json &s = ctx.section("serve");
  const std::string method = s.at("method");
  ResolveMethod(method);
  Vocabulary vocab = LoadVocab(ctx);
  LoadedMethod loaded = LoadMethodCheckpoint(ctx, method, vocab);
  EntityIndex index = LoadMethodIndex(ctx, method);
  const uint64_t index_hash = HashFile(ctx.Out(method + ".index"));
  ServeOptions options;
  options.use_approx = s.at("approx");
  options.probes = ctx.section("index").at("probes");
  options.default_k = s.at("default_k");
  options.threads = s.at("threads");
  RecommendService service(std::move(loaded.model), std::move(vocab), LoadSegmenter(ctx),
                           std::move(index), loaded.checkpoint_hash, index_hash, options);
  if (!service.Listen(s.at("host"), s.at("port"))) {
    throw Error(ErrorCode::kIo, "cannot bind " + s.at("host").get<std::string>() + ":" +
                                    std::to_string(s.at("port").get<int>()));
  }
  return 0;
}

int CmdNeighbors(const Context &ctx, const std::string &method, const std::string &entity,
                 size_t n) {
  ResolveMethod(method);
  const EntityIndex index = LoadMethodIndex(ctx, method);
  if (!index.Find(entity)) throw Error(ErrorCode::kConfigInvalid, "unknown entity '" + entity + "'");
  json out = {{"entity", entity}, {"config_hash", ctx.config_hash}, {"results", json::array()}};
  for (const ScoredEntity &e : index.Neighbors(entity, n)) {
    out["results"].push_back({{"entity", e.name}, {"score", e.score}});
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int CmdAttend(const Context &ctx, const std::string &method, const std::string &query) {
  ResolveMethod(method);
  const Vocabulary vocab = LoadVocab(ctx);
  const Segmenter segmenter = LoadSegmenter(ctx);
  const LoadedMethod loaded = LoadMethodCheckpoint(ctx, method, vocab);
  const Tokenizer tokenizer(vocab, segmenter, loaded.model.tokenizer);
  json out = {{"query", query}, {"config_hash", ctx.config_hash}, {"weights", json::array()}};
  for (const auto &[token, alpha] : DumpAttention(loaded.model, tokenizer, query)) {
    out["weights"].push_back({{"token", token}, {"alpha", alpha}});
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigInvalid:
    case ErrorCode::kInputMissing:
    case ErrorCode::kBadFormat:
    case ErrorCode::kDuplicateRulePattern:
    case ErrorCode::kVocabTooSmall:
    case ErrorCode::kHashMismatch:
    case ErrorCode::kMethodIndexMismatch:
    case ErrorCode::kMZero:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

int RunCli(const std::vector<std::string> &args) {
  CLI::App app{"Entity recommendation: data, training, indexing, evaluation and serving"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  uint64_t seed = 0;
  size_t threads = 1;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed (required)")->required();
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", out_dir, "artifact directory");
  app.add_option("--set", overrides, "config override section.key=value");

  std::string method = "att_bilstm", entity, query;
  size_t n = 10;
  std::vector<CLI::App *> commands = {
      app.add_subcommand("synth", "generate a synthetic world"),
      app.add_subcommand("build-data", "build training pairs from logs"),
      app.add_subcommand("build-vocab", "build the vocabulary from training pairs"),
      app.add_subcommand("train", "train every configured method"),
      app.add_subcommand("build-index", "build entity indexes from checkpoints"),
      app.add_subcommand("eval", "Precision@M comparison of the methods"),
      app.add_subcommand("serve", "run the HTTP recommendation service"),
  };
  CLI::App *neighbors = app.add_subcommand("neighbors", "nearest entities of an entity");
  neighbors->add_option("--method", method);
  neighbors->add_option("--entity", entity)->required();
  neighbors->add_option("-n", n);
  CLI::App *attend = app.add_subcommand("attend", "attention weights of a query");
  attend->add_option("--method", method);
  attend->add_option("--query", query)->required();
  commands.push_back(neighbors);
  commands.push_back(attend);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    Context ctx;
    ctx.config = DefaultConfig();
    if (!config_path.empty()) {
      json user = json::parse(ReadFile(config_path), nullptr, false);
      if (user.is_discarded()) throw Error(ErrorCode::kConfigInvalid, config_path + " is not valid JSON");
      MergeConfig(ctx.config, user);
    }
    for (const std::string &o : overrides) ApplyOverride(ctx.config, o);
    ctx.seed = seed;
    ctx.threads = threads;
    ctx.out_dir = out_dir;
    ctx.config_hash = ConfigHash(ctx.config, seed);
    fs::create_directories(ctx.out_dir);
    for (CLI::App *cmd : commands) {
      if (cmd->parsed()) ctx.command = cmd->get_name();
    }
    EchoConfig(ctx);
    spdlog::info("{}: config {}", ctx.command, ctx.config_hash);

    const std::string &c = ctx.command;
    if (c == "synth") return CmdSynth(ctx);
    if (c == "build-data") return CmdBuildData(ctx);
    if (c == "build-vocab") return CmdBuildVocab(ctx);
    if (c == "train") return CmdTrain(ctx);
    if (c == "build-index") return CmdBuildIndex(ctx);
    if (c == "eval") return CmdEval(ctx);
    if (c == "serve") return CmdServe(ctx);
    if (c == "neighbors") return CmdNeighbors(ctx, method, entity, n);
    if (c == "attend") return CmdAttend(ctx, method, query);
    return 1;
  } catch (const Error &e) {
    spdlog::error("{}", e.what());
    return ExitCodeFor(e.code());
  } catch (const json::exception &e) {
    spdlog::error("ConfigInvalid: {}", e.what());
    return 1;
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return 2;
  }
}

}  // namespace entrec
