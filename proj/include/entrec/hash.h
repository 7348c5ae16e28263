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

#ifndef ENTREC_HASH_H_
#define ENTREC_HASH_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace entrec {

// 64-bit FNV-1a over raw bytes. Used for ngram bucketing and content hashes;
// the value depends only on the byte sequence, never on the platform.
inline uint64_t Fnv1a64(std::string_view bytes,
                        uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

// 16 lowercase hex digits.
std::string HashHex(uint64_t hash);

}  // namespace entrec

#endif  // ENTREC_HASH_H_
