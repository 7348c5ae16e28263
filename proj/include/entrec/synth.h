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

#ifndef ENTREC_SYNTH_H_
#define ENTREC_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "entrec/entity_index.h"
#include "entrec/eval.h"
#include "entrec/vocab.h"

namespace entrec {

// A seeded toy world: entities with private keywords, shared filler words,
// concepts, and the log files the data pipeline consumes. Every query holds
// exactly one keyword, so the query -> entity mapping is deterministic.
struct SynthConfig {
  size_t num_entities = 50;
  size_t num_concepts = 5;
  size_t keywords_per_entity = 3;
  size_t queries_per_entity = 4;
  size_t filler_words = 40;
  size_t fillers_per_query = 2;
  size_t eval_queries_per_entity = 1;
  uint64_t seed = 0;
};

struct SynthWorld {
  std::vector<std::string> entities;
  std::vector<std::vector<std::string>> keywords;  // per entity
  std::vector<std::string> fillers;
  std::vector<std::string> concepts;
  ConceptMap concept_map;
  std::vector<std::string> phrases;
  std::vector<QueryEntityRecord> queries;  // training queries with their entity
  std::vector<EvalCase> eval_cases;        // held-out queries
  std::string spam_entity;                 // blacklisted noise entity
};

SynthWorld GenerateWorld(const SynthConfig &config);

// Writes entities.txt, phrases.txt, concepts.tsv, click_log.tsv, doc_log.tsv,
// related_log.tsv, tag_rules.tsv, tag_queries.txt, blacklist.txt, pairs.tsv
// (the clean query -> entity mapping) and eval_cases.tsv into `dir`.
void WriteWorld(const SynthWorld &world, const SynthConfig &config, const std::string &dir);

// Pairs "x y" over `num_tokens` distinct tokens (all ordered pairs, x != y);
// the target entity is the one named after x. A bag-of-words model sees "x y"
// and "y x" as the same input with different targets.
std::vector<QueryEntityRecord> MakeOrderTask(size_t num_tokens);

}  // namespace entrec

#endif  // ENTREC_SYNTH_H_
