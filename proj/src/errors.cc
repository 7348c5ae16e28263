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

#include "entrec/errors.h"

namespace entrec {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyQuery: return "EmptyQuery";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kStaleActivationCache: return "StaleActivationCache";
    case ErrorCode::kVocabTooSmall: return "VocabTooSmall";
    case ErrorCode::kTargetInNegatives: return "TargetInNegatives";
    case ErrorCode::kDuplicateRulePattern: return "DuplicateRulePattern";
    case ErrorCode::kZeroNormEntity: return "ZeroNormEntity";
    case ErrorCode::kIndexNotClustered: return "IndexNotClustered";
    case ErrorCode::kMZero: return "MZero";
    case ErrorCode::kMethodIndexMismatch: return "MethodIndexMismatch";
    case ErrorCode::kHashMismatch: return "HashMismatch";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kInputMissing: return "InputMissing";
    case ErrorCode::kBadFormat: return "BadFormat";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace entrec
