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

#include "entrec/eval.h"

#include <algorithm>
#include <thread>
#include <unordered_set>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "entrec/errors.h"
#include "entrec/hash.h"
#include "entrec/io.h"

namespace entrec {

std::vector<EvalCase> LoadEvalCases(const std::string &path) {
  std::vector<EvalCase> cases;
  const std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    const std::vector<std::string> f = SplitTabs(lines[i]);
    const std::string at = path + ":" + std::to_string(i + 1);
    if (f.size() != 2) throw Error(ErrorCode::kBadFormat, at + ": expected query<TAB>entities");
    EvalCase c{f[0], {}};
    for (const std::string &e : SplitOn(f[1], ';')) {
      std::string name = Trim(e);
      if (!name.empty()) c.truth.push_back(std::move(name));
    }
    if (c.truth.empty()) throw Error(ErrorCode::kBadFormat, at + ": empty ground truth");
    cases.push_back(std::move(c));
  }
  return cases;
}

std::string FormatEvalCases(std::span<const EvalCase> cases) {
  std::string out;
  for (const EvalCase &c : cases) {
    out += c.query;
    out += '\t';
    for (size_t i = 0; i < c.truth.size(); ++i) out += (i ? ";" : "") + c.truth[i];
    out += '\n';
  }
  return out;
}

double PrecisionAtM(std::span<const std::string> retrieved,
                    std::span<const std::string> truth, size_t m) {
  if (m == 0) throw Error(ErrorCode::kMZero, "precision requires M >= 1");
  const std::unordered_set<std::string_view> gold(truth.begin(), truth.end());
  std::unordered_set<std::string_view> hits;
  for (size_t i = 0; i < std::min(m, retrieved.size()); ++i) {
    if (gold.count(retrieved[i])) hits.insert(retrieved[i]);
  }
  return static_cast<double>(hits.size()) / static_cast<double>(m);
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["case_count"] = case_count;
  j["ms"] = ms;
  j["methods"] = nlohmann::json::array();
  for (const Row &row : rows) {
    nlohmann::json cells = nlohmann::json::object();
    for (size_t i = 0; i < ms.size(); ++i) cells["P@" + std::to_string(ms[i])] = row.precision[i];
    j["methods"].push_back({{"name", row.method}, {"precision", cells}});
  }
  return j;
}

std::string EvalReport::ToTable() const {
  size_t width = 6;
  for (const Row &row : rows) width = std::max(width, row.method.size());
  std::string out = fmt::format("{:<{}}", "method", width);
  for (size_t m : ms) out += fmt::format(" {:>8}", "P@" + std::to_string(m));
  out += '\n';
  for (const Row &row : rows) {
    out += fmt::format("{:<{}}", row.method, width);
    for (double p : row.precision) out += fmt::format(" {:>8.4f}", p);
    out += '\n';
  }
  out += fmt::format("cases: {}  config: {}\n", case_count, config_hash);
  return out;
}

EvalReport Evaluate(std::span<const EvalMethod> methods, std::span<const EvalCase> cases,
                    std::span<const size_t> ms, const std::string &config_hash,
                    size_t threads) {
  if (cases.empty()) throw Error(ErrorCode::kConfigInvalid, "evaluation needs at least one case");
  if (ms.empty()) throw Error(ErrorCode::kConfigInvalid, "evaluation needs at least one M");
  for (size_t m : ms) {
    if (m == 0) throw Error(ErrorCode::kMZero, "precision requires M >= 1");
  }
  const size_t max_m = *std::max_element(ms.begin(), ms.end());

  EvalReport report;
  report.ms.assign(ms.begin(), ms.end());
  report.case_count = cases.size();
  report.config_hash = config_hash;

  for (const EvalMethod &method : methods) {
    const EntityIndex &index = *method.index;
    if (index.metadata().checkpoint_hash != method.checkpoint_hash ||
        index.metadata().encoder != method.model->kind()) {
      throw Error(ErrorCode::kMethodIndexMismatch,
                  "index for method '" + method.name + "' was built from checkpoint " +
                      HashHex(index.metadata().checkpoint_hash) + ", method uses " +
                      HashHex(method.checkpoint_hash));
    }
    for (const EvalCase &c : cases) {
      for (const std::string &e : c.truth) {
        if (!index.Find(e)) {
          throw Error(ErrorCode::kBadFormat, "ground-truth entity '" + e + "' is not indexed");
        }
      }
    }

    // Per-case precision vectors, reduced afterwards in case order.
    std::vector<std::vector<double>> per_case(cases.size());
    auto run = [&](size_t begin, size_t end) {
      for (size_t i = begin; i < end; ++i) {
        std::vector<std::string> names;
        try {
          const TokenizedQuery q = method.tokenizer->Tokenize(cases[i].query);
          const std::vector<double> v = method.model->encoder->Encode(q);
          for (ScoredEntity &e : index.TopKExact(std::span<const double>(v),
                                                 std::min(max_m, index.size()))) {
            names.push_back(std::move(e.name));
          }
        } catch (const Error &err) {
          if (err.code() != ErrorCode::kEmptyQuery) throw;
        }
        for (size_t m : ms) per_case[i].push_back(PrecisionAtM(names, cases[i].truth, m));
      }
    };
    const size_t workers = std::max<size_t>(1, std::min(threads, cases.size()));
    if (workers == 1) {
      run(0, cases.size());
    } else {
      std::vector<std::thread> pool;
      const size_t chunk = (cases.size() + workers - 1) / workers;
      for (size_t t = 0; t < workers; ++t) {
        const size_t begin = t * chunk, end = std::min(cases.size(), begin + chunk);
        if (begin < end) pool.emplace_back(run, begin, end);
      }
      for (std::thread &t : pool) t.join();
    }

    EvalReport::Row row{method.name, std::vector<double>(ms.size(), 0.0)};
    for (const std::vector<double> &p : per_case) {
      for (size_t j = 0; j < ms.size(); ++j) row.precision[j] += p[j];
    }
    for (double &p : row.precision) p /= static_cast<double>(cases.size());
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<std::pair<std::string, double>> DumpAttention(const Model &model,
                                                          const Tokenizer &tokenizer,
                                                          std::string_view query) {
  const auto *encoder = dynamic_cast<const EnhancedEncoder *>(model.encoder.get());
  if (encoder == nullptr) {
    throw Error(ErrorCode::kConfigInvalid, "attention weights need an enhanced-encoder checkpoint");
  }
  const TokenizedQuery q = tokenizer.Tokenize(query);
  const EncodedStates states = encoder->EncodeStates(q);
  std::vector<std::pair<std::string, double>> out;
  for (size_t i = 0; i < states.alpha.size(); ++i) {
    out.emplace_back(q.basic_text[i], states.alpha[i]);
  }
  return out;
}

}  // namespace entrec
