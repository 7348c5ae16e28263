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

#ifndef ENTREC_EVAL_H_
#define ENTREC_EVAL_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "entrec/entity_index.h"
#include "entrec/model.h"
#include "entrec/vocab.h"
#include "json.hpp"

namespace entrec {

struct EvalCase {
  std::string query;
  std::vector<std::string> truth;  // non-empty
};

// Lines of `query \t entity1;entity2;...`.
std::vector<EvalCase> LoadEvalCases(const std::string &path);
std::string FormatEvalCases(std::span<const EvalCase> cases);

// |first M of retrieved ∩ truth| / M, counting each retrieved name once.
// Fewer than M retrieved names count as misses. Throws MZero.
double PrecisionAtM(std::span<const std::string> retrieved,
                    std::span<const std::string> truth, size_t m);

struct EvalMethod {
  std::string name;
  const Model *model = nullptr;
  const Tokenizer *tokenizer = nullptr;
  const EntityIndex *index = nullptr;
  uint64_t checkpoint_hash = 0;
};

inline const std::vector<size_t> kDefaultEvalMs = {1, 10, 20, 30};

struct EvalReport {
  struct Row {
    std::string method;
    std::vector<double> precision;  // one per M
  };
  std::vector<size_t> ms;
  std::vector<Row> rows;
  size_t case_count = 0;
  std::string config_hash;

  nlohmann::json ToJson() const;
  std::string ToTable() const;
};

// Mean P@M over cases for each method, with exact retrieval. Throws
// MethodIndexMismatch when an index was not built from the method's
// checkpoint, and BadFormat when a truth entity is unknown to the index.
EvalReport Evaluate(std::span<const EvalMethod> methods, std::span<const EvalCase> cases,
                    std::span<const size_t> ms = kDefaultEvalMs,
                    const std::string &config_hash = "", size_t threads = 1);

// Basic-level tokens of `query` paired with their attention weights.
// Throws ConfigInvalid for a base-encoder model.
std::vector<std::pair<std::string, double>> DumpAttention(const Model &model,
                                                          const Tokenizer &tokenizer,
                                                          std::string_view query);

}  // namespace entrec

#endif  // ENTREC_EVAL_H_
