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

#include "entrec/text.h"

#include "entrec/errors.h"
#include "entrec/hash.h"

namespace entrec {
namespace {

enum class CharClass { kSpace, kPunct, kCjk, kWord };

struct Decoded {
  char32_t code;
  size_t length;
};

// Invalid sequences decode as one byte with code U+FFFD.
Decoded DecodeUtf8(std::string_view s, size_t pos) {
  const auto byte = [&](size_t i) { return static_cast<unsigned char>(s[i]); };
  const unsigned char b0 = byte(pos);
  if (b0 < 0x80) return {b0, 1};
  size_t len = 0;
  char32_t code = 0;
  if ((b0 & 0xe0) == 0xc0) {
    len = 2;
    code = b0 & 0x1f;
  } else if ((b0 & 0xf0) == 0xe0) {
    len = 3;
    code = b0 & 0x0f;
  } else if ((b0 & 0xf8) == 0xf0) {
    len = 4;
    code = b0 & 0x07;
  } else {
    return {0xfffd, 1};
  }
  if (pos + len > s.size()) return {0xfffd, 1};
  for (size_t i = 1; i < len; ++i) {
    const unsigned char b = byte(pos + i);
    if ((b & 0xc0) != 0x80) return {0xfffd, 1};
    code = (code << 6) | (b & 0x3f);
  }
  return {code, len};
}

bool IsCjk(char32_t c) {
  return (c >= 0x3040 && c <= 0x30ff) ||   // kana
         (c >= 0x3400 && c <= 0x4dbf) ||   // extension A
         (c >= 0x4e00 && c <= 0x9fff) ||   // unified ideographs
         (c >= 0xf900 && c <= 0xfaff) ||   // compatibility ideographs
         (c >= 0x20000 && c <= 0x2ffff);   // supplementary ideographs
}

CharClass Classify(char32_t c) {
  if (c < 0x80) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
        c == '\v') {
      return CharClass::kSpace;
    }
    if ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
        (c >= 'A' && c <= 'Z')) {
      return CharClass::kWord;
    }
    return c < 0x20 || c == 0x7f ? CharClass::kSpace : CharClass::kPunct;
  }
  if (c == 0x00a0 || c == 0x3000 || (c >= 0x2000 && c <= 0x200b)) {
    return CharClass::kSpace;
  }
  if ((c >= 0x00a1 && c <= 0x00bf) || c == 0x00d7 || c == 0x00f7 ||
      (c >= 0x2010 && c <= 0x205e) || (c >= 0x3001 && c <= 0x303f) ||
      (c >= 0xff01 && c <= 0xff0f) || (c >= 0xff1a && c <= 0xff20) ||
      (c >= 0xff3b && c <= 0xff40) || (c >= 0xff5b && c <= 0xff65)) {
    return CharClass::kPunct;
  }
  if (IsCjk(c)) return CharClass::kCjk;
  return CharClass::kWord;
}

std::string JoinKey(std::span<const std::string> tokens) {
  std::string key;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) key.push_back('\x1f');
    key += tokens[i];
  }
  return key;
}

}  // namespace

std::vector<std::string> SplitBasic(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  size_t pos = 0;
  while (pos < text.size()) {
    const Decoded d = DecodeUtf8(text, pos);
    switch (Classify(d.code)) {
      case CharClass::kSpace:
      case CharClass::kPunct:
        flush();
        break;
      case CharClass::kCjk:
        flush();
        tokens.emplace_back(text.substr(pos, d.length));
        break;
      case CharClass::kWord:
        if (d.code >= 'A' && d.code <= 'Z') {
          current.push_back(static_cast<char>(d.code - 'A' + 'a'));
        } else {
          current.append(text.substr(pos, d.length));
        }
        break;
    }
    pos += d.length;
  }
  flush();
  return tokens;
}

bool StartsWithCjk(std::string_view token) {
  return !token.empty() && IsCjk(DecodeUtf8(token, 0).code);
}

bool EndsWithCjk(std::string_view token) {
  if (token.empty()) return false;
  size_t pos = token.size() - 1;
  while (pos > 0 && (static_cast<unsigned char>(token[pos]) & 0xc0) == 0x80) {
    --pos;
  }
  return IsCjk(DecodeUtf8(token, pos).code);
}

std::string JoinPhrase(std::span<const std::string> tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && !EndsWithCjk(tokens[i - 1]) && !StartsWithCjk(tokens[i])) {
      out.push_back('_');
    }
    out += tokens[i];
  }
  return out;
}

PhraseMatcher::PhraseMatcher(std::span<const std::string> phrases,
                             size_t min_tokens) {
  for (size_t i = 0; i < phrases.size(); ++i) {
    const std::vector<std::string> tokens = SplitBasic(phrases[i]);
    if (tokens.empty() || tokens.size() < min_tokens) continue;
    if (lookup_.emplace(JoinKey(tokens), i).second) {
      max_tokens_ = std::max(max_tokens_, tokens.size());
    }
  }
}

std::vector<PhraseMatcher::Match> PhraseMatcher::FindAll(
    std::span<const std::string> tokens) const {
  std::vector<Match> matches;
  size_t pos = 0;
  while (pos < tokens.size()) {
    bool found = false;
    const size_t longest = std::min(max_tokens_, tokens.size() - pos);
    for (size_t len = longest; len >= 1; --len) {
      auto it = lookup_.find(JoinKey(tokens.subspan(pos, len)));
      if (it != lookup_.end()) {
        matches.push_back({pos, len, it->second});
        pos += len;
        found = true;
        break;
      }
    }
    if (!found) ++pos;
  }
  return matches;
}

Segmentation Segmenter::Merge(std::vector<std::string> basic) const {
  if (basic.empty()) throw Error(ErrorCode::kEmptyQuery, "no tokens in query");
  Segmentation seg;
  size_t pos = 0;
  for (const PhraseMatcher::Match &m : phrases_.FindAll(basic)) {
    for (; pos < m.begin; ++pos) {
      seg.semantic.push_back(basic[pos]);
      seg.semantic_span.push_back(1);
    }
    seg.semantic.push_back(
        JoinPhrase(std::span<const std::string>(basic).subspan(m.begin, m.length)));
    seg.semantic_span.push_back(static_cast<uint32_t>(m.length));
    pos = m.begin + m.length;
  }
  for (; pos < basic.size(); ++pos) {
    seg.semantic.push_back(basic[pos]);
    seg.semantic_span.push_back(1);
  }
  seg.basic = std::move(basic);
  return seg;
}

Segmentation Segmenter::Segment(std::string_view text) const {
  return Merge(SplitBasic(text));
}

Segmentation Segmenter::SegmentPretokenized(std::string_view text) const {
  std::vector<std::string> basic;
  size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    size_t end = pos;
    while (end < text.size() && text[end] != ' ' && text[end] != '\t') ++end;
    if (end > pos) basic.emplace_back(text.substr(pos, end - pos));
    pos = end;
  }
  return Merge(std::move(basic));
}

std::vector<uint32_t> ExtractNgrams(std::span<const std::string> tokens,
                                    std::span<const int> orders,
                                    uint32_t num_buckets) {
  std::vector<uint32_t> ids;
  for (int order : orders) {
    const size_t n = static_cast<size_t>(order);
    if (n == 0 || tokens.size() < n) continue;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
      uint64_t h = Fnv1a64(tokens[i]);
      for (size_t j = 1; j < n; ++j) {
        h = Fnv1a64(" ", h);
        h = Fnv1a64(tokens[i + j], h);
      }
      ids.push_back(static_cast<uint32_t>(h % num_buckets));
    }
  }
  return ids;
}

}  // namespace entrec
