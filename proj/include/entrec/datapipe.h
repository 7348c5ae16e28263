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

#ifndef ENTREC_DATAPIPE_H_
#define ENTREC_DATAPIPE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "entrec/rng.h"
#include "entrec/text.h"
#include "entrec/vocab.h"

namespace entrec {

// Column orders of the log files:
//   click log:   query \t entity \t impressions \t clicks
//   doc log:     query \t title \t summary \t clicks
//   related log: query \t recommended query
//   tag rules:   exact|substring \t pattern \t tag \t entity1;entity2;...
//   tag queries: one query per line
//   blacklist:   one entity per line
//   quality:     entity \t score
//   pairs:       query \t entity \t weight

struct ClickLogRecord {
  std::string query;
  std::string entity;
  int64_t impressions = 0;
  int64_t clicks = 0;
};

struct DocLogRecord {
  std::string query;
  std::string title;
  std::string summary;
  int64_t clicks = 0;
};

struct RelatedQueryRecord {
  std::string query;
  std::string recommended;
};

enum class PatternMode { kExact, kSubstring };

struct TagRule {
  PatternMode mode = PatternMode::kSubstring;
  std::string pattern;
  std::string tag;
  std::vector<std::string> entities;
};

using PairList = std::vector<QueryEntityRecord>;

std::vector<ClickLogRecord> LoadClickLog(const std::string &path);
std::vector<DocLogRecord> LoadDocLog(const std::string &path);
std::vector<RelatedQueryRecord> LoadRelatedLog(const std::string &path);
// Throws DuplicateRulePattern if a pattern occurs twice.
std::vector<TagRule> LoadTagRules(const std::string &path);
std::vector<std::string> LoadLineList(const std::string &path);
std::unordered_map<std::string, double> LoadQualityScores(const std::string &path);

PairList LoadPairs(const std::string &path);
std::string FormatPairs(std::span<const QueryEntityRecord> pairs);
void SavePairs(std::span<const QueryEntityRecord> pairs, const std::string &path);

// Entity names with a longest-match spotter over basic tokens.
class EntityDictionary {
 public:
  explicit EntityDictionary(std::vector<std::string> names);

  bool Contains(const std::string &name) const { return known_.count(name) > 0; }
  // Distinct entities spotted in `text`, in order of first occurrence.
  std::vector<std::string> Spot(std::string_view text) const;
  const std::vector<std::string> &names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_set<std::string> known_;
  PhraseMatcher matcher_;
};

PairList BuildQueryClickEntity(std::span<const ClickLogRecord> records,
                               double ctr_threshold, const EntityDictionary &dict);
PairList BuildQueryDocEntity(std::span<const DocLogRecord> records,
                             const EntityDictionary &dict, int64_t min_doc_clicks);
PairList BuildQueryQueryEntity(std::span<const RelatedQueryRecord> records,
                               const EntityDictionary &dict);
PairList BuildQueryTagEntity(std::span<const std::string> queries,
                             std::span<const TagRule> rules, const EntityDictionary &dict);

struct QualityRules {
  std::unordered_set<std::string> blacklist;
  // Entities with a score below the threshold are dropped; unscored entities
  // are kept.
  std::unordered_map<std::string, double> scores;
  double score_threshold = 0.0;
};

PairList FilterLowQuality(PairList pairs, const QualityRules &rules, size_t *removed = nullptr);
PairList FilterLowFreq(PairList pairs, int64_t min_count);
double SubsampleKeepProbability(double fraction, double t);
PairList SubsampleHighFreq(PairList pairs, double t, SeededRng &rng);
PairList ShufflePairs(PairList pairs, SeededRng &rng);

struct DataPipelineInputs {
  std::string entity_dict;  // required
  std::string click_log;    // empty = source skipped
  std::string doc_log;
  std::string related_log;
  std::string tag_rules;
  std::string tag_queries;
  std::string blacklist;
  std::string quality_scores;
};

struct DataPipelineConfig {
  double ctr_threshold = 0.1;
  int64_t min_doc_clicks = 1;
  double quality_threshold = 0.0;
  int64_t min_entity_count = 2;
  double subsample_t = 0.05;
  uint64_t seed = 0;
};

struct DataPipelineReport {
  size_t click_pairs = 0;
  size_t doc_pairs = 0;
  size_t query_pairs = 0;
  size_t tag_pairs = 0;
  size_t removed_low_quality = 0;
  size_t removed_low_freq = 0;
  size_t removed_subsample = 0;
  size_t output_pairs = 0;
};

// build -> low quality -> low frequency -> subsample -> shuffle.
PairList RunDataPipeline(const DataPipelineInputs &inputs, const DataPipelineConfig &config,
                         DataPipelineReport *report = nullptr);

}  // namespace entrec

#endif  // ENTREC_DATAPIPE_H_
