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

#include "entrec/datapipe.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <spdlog/fmt/fmt.h>

#include "entrec/errors.h"
#include "entrec/io.h"

namespace entrec {
namespace {

std::string Where(const std::string &path, size_t line) {
  return path + ":" + std::to_string(line + 1);
}

// Non-blank lines split on tabs; each must have `columns` fields.
template <typename Fn>
void ForEachRow(const std::string &path, size_t columns, Fn fn) {
  const std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    const std::vector<std::string> fields = SplitTabs(lines[i]);
    if (fields.size() != columns) {
      throw Error(ErrorCode::kBadFormat, Where(path, i) + ": expected " +
                                             std::to_string(columns) + " columns, got " +
                                             std::to_string(fields.size()));
    }
    fn(fields, Where(path, i));
  }
}

std::vector<std::string> SplitEntities(std::string_view field) {
  std::vector<std::string> out;
  for (const std::string &e : SplitOn(field, ';')) {
    std::string name = Trim(e);
    if (!name.empty()) out.push_back(std::move(name));
  }
  return out;
}

}  // namespace

std::vector<ClickLogRecord> LoadClickLog(const std::string &path) {
  std::vector<ClickLogRecord> records;
  ForEachRow(path, 4, [&](const std::vector<std::string> &f, const std::string &at) {
    ClickLogRecord r{f[0], f[1], ParseInt(f[2], at), ParseInt(f[3], at)};
    if (r.impressions <= 0 || r.clicks < 0 || r.clicks > r.impressions) {
      throw Error(ErrorCode::kBadFormat, at + ": need 0 <= clicks <= impressions, impressions > 0");
    }
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<DocLogRecord> LoadDocLog(const std::string &path) {
  std::vector<DocLogRecord> records;
  ForEachRow(path, 4, [&](const std::vector<std::string> &f, const std::string &at) {
    DocLogRecord r{f[0], f[1], f[2], ParseInt(f[3], at)};
    if (r.clicks < 0) throw Error(ErrorCode::kBadFormat, at + ": negative click count");
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<RelatedQueryRecord> LoadRelatedLog(const std::string &path) {
  std::vector<RelatedQueryRecord> records;
  ForEachRow(path, 2, [&](const std::vector<std::string> &f, const std::string &at) {
    if (Trim(f[0]).empty() || Trim(f[1]).empty()) {
      throw Error(ErrorCode::kBadFormat, at + ": empty query");
    }
    records.push_back({f[0], f[1]});
  });
  return records;
}

std::vector<TagRule> LoadTagRules(const std::string &path) {
  std::vector<TagRule> rules;
  std::unordered_set<std::string> seen;
  ForEachRow(path, 4, [&](const std::vector<std::string> &f, const std::string &at) {
    TagRule rule;
    if (f[0] == "exact") {
      rule.mode = PatternMode::kExact;
    } else if (f[0] == "substring") {
      rule.mode = PatternMode::kSubstring;
    } else {
      throw Error(ErrorCode::kBadFormat, at + ": unknown pattern mode '" + f[0] + "'");
    }
    rule.pattern = f[1];
    rule.tag = f[2];
    rule.entities = SplitEntities(f[3]);
    if (rule.pattern.empty() || rule.entities.empty()) {
      throw Error(ErrorCode::kBadFormat, at + ": rule needs a pattern and >= 1 entity");
    }
    if (!seen.insert(rule.pattern).second) {
      throw Error(ErrorCode::kDuplicateRulePattern, at + ": pattern '" + rule.pattern + "'");
    }
    rules.push_back(std::move(rule));
  });
  return rules;
}

std::vector<std::string> LoadLineList(const std::string &path) {
  std::vector<std::string> out;
  for (const std::string &line : ReadLines(path)) {
    std::string item = Trim(line);
    if (!item.empty()) out.push_back(std::move(item));
  }
  return out;
}

std::unordered_map<std::string, double> LoadQualityScores(const std::string &path) {
  std::unordered_map<std::string, double> scores;
  ForEachRow(path, 2, [&](const std::vector<std::string> &f, const std::string &at) {
    scores[f[0]] = ParseDouble(f[1], at);
  });
  return scores;
}

PairList LoadPairs(const std::string &path) {
  PairList pairs;
  const std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    const std::vector<std::string> f = SplitTabs(lines[i]);
    if (f.size() != 2 && f.size() != 3) {
      throw Error(ErrorCode::kBadFormat, Where(path, i) + ": expected query<TAB>entity[<TAB>weight]");
    }
    QueryEntityRecord r{f[0], f[1], 1.0};
    if (f.size() == 3) r.weight = ParseDouble(f[2], Where(path, i));
    if (!(r.weight > 0) || !std::isfinite(r.weight)) {
      throw Error(ErrorCode::kBadFormat, Where(path, i) + ": weight must be positive");
    }
    pairs.push_back(std::move(r));
  }
  return pairs;
}

std::string FormatPairs(std::span<const QueryEntityRecord> pairs) {
  std::string out;
  for (const QueryEntityRecord &p : pairs) {
    out += fmt::format("{}\t{}\t{}\n", p.query, p.entity, p.weight);
  }
  return out;
}

void SavePairs(std::span<const QueryEntityRecord> pairs, const std::string &path) {
  WriteFile(path, FormatPairs(pairs));
}

EntityDictionary::EntityDictionary(std::vector<std::string> names)
    : names_(std::move(names)), known_(names_.begin(), names_.end()), matcher_(names_) {}

std::vector<std::string> EntityDictionary::Spot(std::string_view text) const {
  const std::vector<std::string> tokens = SplitBasic(text);
  std::vector<std::string> out;
  for (const PhraseMatcher::Match &m : matcher_.FindAll(tokens)) {
    const std::string &name = names_[m.phrase];
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  }
  return out;
}

PairList BuildQueryClickEntity(std::span<const ClickLogRecord> records,
                               double ctr_threshold, const EntityDictionary &dict) {
  if (!(ctr_threshold > 0 && ctr_threshold <= 1)) {
    throw Error(ErrorCode::kConfigInvalid, "ctr_threshold must be in (0, 1]");
  }
  PairList pairs;
  for (const ClickLogRecord &r : records) {
    const double ctr = static_cast<double>(r.clicks) / static_cast<double>(r.impressions);
    if (ctr >= ctr_threshold && dict.Contains(r.entity)) {
      pairs.push_back({r.query, r.entity, ctr});
    }
  }
  return pairs;
}

PairList BuildQueryDocEntity(std::span<const DocLogRecord> records,
                             const EntityDictionary &dict, int64_t min_doc_clicks) {
  PairList pairs;
  for (const DocLogRecord &r : records) {
    if (r.clicks < min_doc_clicks) continue;
    std::vector<std::string> found = dict.Spot(r.title);
    for (std::string &e : dict.Spot(r.summary)) {
      if (std::find(found.begin(), found.end(), e) == found.end()) found.push_back(std::move(e));
    }
    for (std::string &e : found) pairs.push_back({r.query, std::move(e), 1.0});
  }
  return pairs;
}

PairList BuildQueryQueryEntity(std::span<const RelatedQueryRecord> records,
                               const EntityDictionary &dict) {
  PairList pairs;
  for (const RelatedQueryRecord &r : records) {
    for (std::string &e : dict.Spot(r.recommended)) pairs.push_back({r.query, std::move(e), 1.0});
  }
  return pairs;
}

PairList BuildQueryTagEntity(std::span<const std::string> queries,
                             std::span<const TagRule> rules, const EntityDictionary &dict) {
  PairList pairs;
  for (const std::string &q : queries) {
    for (const TagRule &rule : rules) {
      const bool hit = rule.mode == PatternMode::kExact
                           ? q == rule.pattern
                           : q.find(rule.pattern) != std::string::npos;
      if (!hit) continue;
      for (const std::string &e : rule.entities) {
        if (dict.Contains(e)) pairs.push_back({q, e, 1.0});
      }
      break;
    }
  }
  return pairs;
}

PairList FilterLowQuality(PairList pairs, const QualityRules &rules, size_t *removed) {
  const size_t before = pairs.size();
  std::erase_if(pairs, [&](const QueryEntityRecord &p) {
    if (rules.blacklist.count(p.entity)) return true;
    auto it = rules.scores.find(p.entity);
    return it != rules.scores.end() && it->second < rules.score_threshold;
  });
  if (removed) *removed = before - pairs.size();
  return pairs;
}

PairList FilterLowFreq(PairList pairs, int64_t min_count) {
  std::unordered_map<std::string, int64_t> counts;
  for (const QueryEntityRecord &p : pairs) ++counts[p.entity];
  std::erase_if(pairs, [&](const QueryEntityRecord &p) { return counts[p.entity] < min_count; });
  return pairs;
}

double SubsampleKeepProbability(double fraction, double t) {
  if (fraction <= t) return 1.0;
  return std::min(1.0, std::sqrt(t / fraction));
}

PairList SubsampleHighFreq(PairList pairs, double t, SeededRng &rng) {
  if (!(t > 0)) throw Error(ErrorCode::kConfigInvalid, "subsample t must be positive");
  std::unordered_map<std::string, int64_t> counts;
  for (const QueryEntityRecord &p : pairs) ++counts[p.entity];
  const double total = static_cast<double>(pairs.size());
  PairList kept;
  kept.reserve(pairs.size());
  for (QueryEntityRecord &p : pairs) {
    const double keep = SubsampleKeepProbability(counts[p.entity] / total, t);
    if (keep >= 1.0 || rng.Bernoulli(keep)) kept.push_back(std::move(p));
  }
  return kept;
}

PairList ShufflePairs(PairList pairs, SeededRng &rng) {
  Shuffle(pairs, rng);
  return pairs;
}

PairList RunDataPipeline(const DataPipelineInputs &inputs, const DataPipelineConfig &config,
                         DataPipelineReport *report) {
  DataPipelineReport stats;
  const EntityDictionary dict(LoadLineList(inputs.entity_dict));
  PairList pairs;
  auto append = [&](PairList part, size_t *count) {
    *count = part.size();
    for (QueryEntityRecord &p : part) pairs.push_back(std::move(p));
  };
  if (!inputs.click_log.empty()) {
    append(BuildQueryClickEntity(LoadClickLog(inputs.click_log), config.ctr_threshold, dict),
           &stats.click_pairs);
  }
  if (!inputs.doc_log.empty()) {
    append(BuildQueryDocEntity(LoadDocLog(inputs.doc_log), dict, config.min_doc_clicks),
           &stats.doc_pairs);
  }
  if (!inputs.related_log.empty()) {
    append(BuildQueryQueryEntity(LoadRelatedLog(inputs.related_log), dict), &stats.query_pairs);
  }
  if (!inputs.tag_rules.empty() && !inputs.tag_queries.empty()) {
    const std::vector<std::string> queries = LoadLineList(inputs.tag_queries);
    append(BuildQueryTagEntity(queries, LoadTagRules(inputs.tag_rules), dict), &stats.tag_pairs);
  }

  QualityRules quality;
  if (!inputs.blacklist.empty()) {
    for (std::string &e : LoadLineList(inputs.blacklist)) quality.blacklist.insert(std::move(e));
  }
  if (!inputs.quality_scores.empty()) quality.scores = LoadQualityScores(inputs.quality_scores);
  quality.score_threshold = config.quality_threshold;
  pairs = FilterLowQuality(std::move(pairs), quality, &stats.removed_low_quality);

  size_t before = pairs.size();
  pairs = FilterLowFreq(std::move(pairs), config.min_entity_count);
  stats.removed_low_freq = before - pairs.size();

  SeededRng rng(config.seed);
  before = pairs.size();
  pairs = SubsampleHighFreq(std::move(pairs), config.subsample_t, rng);
  stats.removed_subsample = before - pairs.size();
  pairs = ShufflePairs(std::move(pairs), rng);
  stats.output_pairs = pairs.size();
  if (report) *report = stats;
  return pairs;
}

}  // namespace entrec
