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

#include "entrec/synth.h"

#include <filesystem>
#include <set>

#include <spdlog/fmt/fmt.h>

#include "entrec/datapipe.h"
#include "entrec/errors.h"
#include "entrec/io.h"
#include "entrec/rng.h"

namespace entrec {
namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

// Fresh three-syllable words. Equal length rules out one word being a
// substring of another, which keeps substring tag rules unambiguous.
class WordSource {
 public:
  explicit WordSource(SeededRng &rng) : rng_(rng) {}

  std::string Next() {
    for (;;) {
      std::string word;
      for (int s = 0; s < 3; ++s) {
        word += kConsonants[rng_.UniformInt(kConsonants.size())];
        word += kVowels[rng_.UniformInt(kVowels.size())];
      }
      if (used_.insert(word).second) return word;
    }
  }

 private:
  SeededRng &rng_;
  std::set<std::string> used_;
};

std::string MakeQuery(const std::string &keyword, const std::vector<std::string> &fillers,
                      size_t count, SeededRng &rng) {
  std::vector<std::string> tokens = {keyword};
  std::vector<size_t> picks(fillers.size());
  for (size_t i = 0; i < picks.size(); ++i) picks[i] = i;
  Shuffle(picks, rng);
  for (size_t i = 0; i < std::min(count, picks.size()); ++i) tokens.push_back(fillers[picks[i]]);
  Shuffle(tokens, rng);
  std::string q;
  for (const std::string &t : tokens) q += (q.empty() ? "" : " ") + t;
  return q;
}

}  // namespace

SynthWorld GenerateWorld(const SynthConfig &config) {
  if (config.num_entities < 2 || config.num_concepts == 0 || config.keywords_per_entity == 0 ||
      config.queries_per_entity == 0) {
    throw Error(ErrorCode::kConfigInvalid, "synthetic world needs >= 2 entities and >= 1 of each count");
  }
  SeededRng rng(config.seed);
  WordSource words(rng);
  SynthWorld world;

  for (size_t c = 0; c < config.num_concepts; ++c) world.concepts.push_back("cat_" + words.Next());
  for (size_t i = 0; i < config.num_entities; ++i) {
    std::string name = words.Next();
    if (i % 4 == 3) {
      name += " " + words.Next();
      world.phrases.push_back(name);
    }
    world.entities.push_back(name);
    std::vector<std::string> concepts = {world.concepts[i % config.num_concepts]};
    if (i % 7 == 0 && config.num_concepts > 1) {
      concepts.push_back(world.concepts[(i + 1) % config.num_concepts]);
    }
    world.concept_map[name] = std::move(concepts);
  }
  for (size_t i = 0; i < config.num_entities; ++i) {
    std::vector<std::string> kws;
    for (size_t k = 0; k < config.keywords_per_entity; ++k) kws.push_back(words.Next());
    world.keywords.push_back(std::move(kws));
  }
  for (size_t f = 0; f < config.filler_words; ++f) world.fillers.push_back(words.Next());
  for (size_t f = 0; f + 1 < std::min<size_t>(config.filler_words, 10); f += 2) {
    world.phrases.push_back(world.fillers[f] + " " + world.fillers[f + 1]);
  }
  world.spam_entity = "spam " + words.Next();

  std::set<std::string> seen;
  auto fresh_query = [&](size_t entity, size_t salt) {
    const auto &kws = world.keywords[entity];
    for (size_t attempt = 0; attempt < 1000; ++attempt) {
      std::string q = MakeQuery(kws[(salt + attempt) % kws.size()], world.fillers,
                                config.fillers_per_query, rng);
      if (seen.insert(q).second) return q;
    }
    throw Error(ErrorCode::kConfigInvalid, "too few filler words for distinct queries");
  };
  for (size_t i = 0; i < config.num_entities; ++i) {
    for (size_t j = 0; j < config.queries_per_entity; ++j) {
      world.queries.push_back({fresh_query(i, j), world.entities[i], 1.0});
    }
  }
  for (size_t i = 0; i < config.num_entities; ++i) {
    for (size_t j = 0; j < config.eval_queries_per_entity; ++j) {
      world.eval_cases.push_back({fresh_query(i, j), {world.entities[i]}});
    }
  }
  return world;
}

void WriteWorld(const SynthWorld &world, const SynthConfig &config, const std::string &dir) {
  std::filesystem::create_directories(dir);
  SeededRng rng(config.seed ^ 0x5eed5eedULL);
  auto path = [&](const char *name) { return (std::filesystem::path(dir) / name).string(); };
  auto lines = [](const std::vector<std::string> &items) {
    std::string out;
    for (const std::string &s : items) out += s + "\n";
    return out;
  };
  auto filler = [&] { return world.fillers[rng.UniformInt(world.fillers.size())]; };

  std::vector<std::string> entities = world.entities;
  entities.push_back(world.spam_entity);
  WriteFile(path("entities.txt"), lines(entities));
  WriteFile(path("phrases.txt"), lines(world.phrases));
  WriteFile(path("blacklist.txt"), world.spam_entity + "\n");

  std::string concepts;
  for (const std::string &e : world.entities) {
    const auto &list = world.concept_map.at(e);
    concepts += e + "\t";
    for (size_t i = 0; i < list.size(); ++i) concepts += (i ? ";" : "") + list[i];
    concepts += "\n";
  }
  WriteFile(path("concepts.tsv"), concepts);

  std::string clicks, docs, related, queries;
  for (size_t i = 0; i < world.queries.size(); ++i) {
    const QueryEntityRecord &r = world.queries[i];
    const int64_t imps = 50 + static_cast<int64_t>(rng.UniformInt(50));
    const int64_t good = static_cast<int64_t>(imps * rng.Uniform(0.3, 0.8));
    clicks += fmt::format("{}\t{}\t{}\t{}\n", r.query, r.entity, imps, good);
    const std::string &other = world.entities[rng.UniformInt(world.entities.size())];
    if (other != r.entity) {
      const int64_t bad = static_cast<int64_t>(rng.UniformInt(imps / 20 + 1));
      clicks += fmt::format("{}\t{}\t{}\t{}\n", r.query, other, imps, bad);
    }
    if (i % 10 == 0) clicks += fmt::format("{}\t{}\t{}\t{}\n", r.query, world.spam_entity, imps, good);
    if (i % 2 == 0) {
      docs += fmt::format("{}\t{} {} {}\tabout {} and {}\t{}\n", r.query, filler(), r.entity,
                          filler(), r.entity, filler(), rng.UniformInt(5));
    }
    if (i % 3 == 0) related += fmt::format("{}\t{} {}\n", r.query, r.entity, filler());
    queries += r.query + "\n";
  }
  WriteFile(path("click_log.tsv"), clicks);
  WriteFile(path("doc_log.tsv"), docs);
  WriteFile(path("related_log.tsv"), related);
  WriteFile(path("tag_queries.txt"), queries);

  std::string rules;
  for (size_t i = 0; i < world.entities.size(); ++i) {
    rules += fmt::format("substring\t{}\t{}\t{}\n", world.keywords[i][0],
                         world.concept_map.at(world.entities[i])[0], world.entities[i]);
  }
  WriteFile(path("tag_rules.tsv"), rules);
  SavePairs(world.queries, path("pairs.tsv"));
  WriteFile(path("eval_cases.tsv"), FormatEvalCases(world.eval_cases));
}

std::vector<QueryEntityRecord> MakeOrderTask(size_t num_tokens) {
  std::vector<std::string> tokens;
  for (size_t i = 0; i < num_tokens; ++i) tokens.push_back(fmt::format("t{:02}", i));
  std::vector<QueryEntityRecord> records;
  for (size_t x = 0; x < num_tokens; ++x) {
    for (size_t y = 0; y < num_tokens; ++y) {
      if (x != y) records.push_back({tokens[x] + " " + tokens[y], "target " + tokens[x], 1.0});
    }
  }
  return records;
}

}  // namespace entrec
