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

#ifndef ENTREC_IO_H_
#define ENTREC_IO_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "entrec/matrix.h"

namespace entrec {

// Little-endian binary encoding, independent of host byte order.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream &out) : out_(out) {}

  void WriteBytes(std::string_view bytes);
  void WriteU32(uint32_t v);
  void WriteU64(uint64_t v);
  void WriteF32(float v);
  void WriteF64(double v);
  // u32 length followed by the bytes.
  void WriteString(std::string_view s);

 private:
  std::ostream &out_;
};

// Reader counterpart; any short read throws BadFormat.
class BinaryReader {
 public:
  BinaryReader(std::istream &in, std::string source)
      : in_(in), source_(std::move(source)) {}

  std::string ReadBytes(size_t n);
  uint32_t ReadU32();
  uint64_t ReadU64();
  float ReadF32();
  double ReadF64();
  std::string ReadString();

  [[noreturn]] void Fail(const std::string &what) const;

 private:
  std::istream &in_;
  std::string source_;
};

// Reads a whole text file as lines (trailing '\r' stripped). Throws
// InputMissing if the file cannot be opened.
std::vector<std::string> ReadLines(const std::string &path);

// Splits on tabs; empty fields are kept.
std::vector<std::string> SplitTabs(std::string_view line);
std::vector<std::string> SplitOn(std::string_view text, char sep);

std::string Trim(std::string_view s);

// Parses a number field, throwing BadFormat with file/line context.
double ParseDouble(std::string_view field, const std::string &context);
int64_t ParseInt(std::string_view field, const std::string &context);

std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view contents);
uint64_t HashFile(const std::string &path);

}  // namespace entrec

#endif  // ENTREC_IO_H_
