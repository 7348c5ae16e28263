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

#include "entrec/io.h"

#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>

#include "entrec/errors.h"
#include "entrec/hash.h"

namespace entrec {
namespace {

template <typename T>
void PutLittleEndian(std::ostream &out, T value) {
  char bytes[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  }
  out.write(bytes, sizeof(T));
}

}  // namespace

void BinaryWriter::WriteBytes(std::string_view bytes) {
  out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}
void BinaryWriter::WriteU32(uint32_t v) { PutLittleEndian(out_, v); }
void BinaryWriter::WriteU64(uint64_t v) { PutLittleEndian(out_, v); }
void BinaryWriter::WriteF32(float v) { WriteU32(std::bit_cast<uint32_t>(v)); }
void BinaryWriter::WriteF64(double v) { WriteU64(std::bit_cast<uint64_t>(v)); }
void BinaryWriter::WriteString(std::string_view s) {
  WriteU32(static_cast<uint32_t>(s.size()));
  WriteBytes(s);
}

void BinaryReader::Fail(const std::string &what) const {
  throw Error(ErrorCode::kBadFormat, source_ + ": " + what);
}

std::string BinaryReader::ReadBytes(size_t n) {
  std::string bytes(n, '\0');
  in_.read(bytes.data(), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in_.gcount()) != n) Fail("unexpected end of file");
  return bytes;
}

uint32_t BinaryReader::ReadU32() {
  const std::string b = ReadBytes(4);
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
  return v;
}

uint64_t BinaryReader::ReadU64() {
  const std::string b = ReadBytes(8);
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
  return v;
}

float BinaryReader::ReadF32() { return std::bit_cast<float>(ReadU32()); }
double BinaryReader::ReadF64() { return std::bit_cast<double>(ReadU64()); }

std::string BinaryReader::ReadString() {
  const uint32_t n = ReadU32();
  if (n > (1u << 30)) Fail("string length out of range");
  return ReadBytes(n);
}

std::vector<std::string> ReadLines(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInputMissing, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<std::string> SplitOn(std::string_view text, char sep) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t end = text.find(sep, start);
    if (end == std::string_view::npos) {
      fields.emplace_back(text.substr(start));
      return fields;
    }
    fields.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
}

std::vector<std::string> SplitTabs(std::string_view line) {
  return SplitOn(line, '\t');
}

std::string Trim(std::string_view s) {
  const auto space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  size_t b = 0;
  size_t e = s.size();
  while (b < e && space(s[b])) ++b;
  while (e > b && space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

double ParseDouble(std::string_view field, const std::string &context) {
  const std::string text = Trim(field);
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception &) {
  }
  throw Error(ErrorCode::kBadFormat, context + ": not a number: '" + text + "'");
}

int64_t ParseInt(std::string_view field, const std::string &context) {
  const std::string text = Trim(field);
  int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kBadFormat, context + ": not an integer: '" + text + "'");
  }
  return v;
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInputMissing, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::string &path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

uint64_t HashFile(const std::string &path) { return Fnv1a64(ReadFile(path)); }

}  // namespace entrec
