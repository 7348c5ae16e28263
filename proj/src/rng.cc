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

#include "entrec/rng.h"

#include <sstream>

#include "entrec/errors.h"

namespace entrec {

std::string SeededRng::SaveState() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

void SeededRng::RestoreState(uint64_t seed, const std::string &state) {
  std::istringstream in(state);
  std::mt19937_64 engine;
  in >> engine;
  if (in.fail()) throw Error(ErrorCode::kBadFormat, "corrupt RNG state");
  seed_ = seed;
  engine_ = engine;
}

}  // namespace entrec
