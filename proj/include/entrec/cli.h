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

#ifndef ENTREC_CLI_H_
#define ENTREC_CLI_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace entrec {

// Every recognised config key with its default. User configs may only set
// keys present here, with a value of the same JSON type.
nlohmann::json DefaultConfig();

// Overlays `user` onto `base`. Throws ConfigInvalid on unknown keys or type
// mismatches; `where` prefixes error messages.
void MergeConfig(nlohmann::json &base, const nlohmann::json &user, const std::string &where = "");

// Applies "section.key=value". The value is parsed as JSON when possible and
// taken as a string otherwise.
void ApplyOverride(nlohmann::json &config, const std::string &assignment);

// Hash of the effective config and seed; stamped on every artifact.
std::string ConfigHash(const nlohmann::json &config, uint64_t seed);

// Exit codes: 0 success, 1 validation error, 2 runtime failure.
int RunCli(const std::vector<std::string> &args);

}  // namespace entrec

#endif  // ENTREC_CLI_H_
