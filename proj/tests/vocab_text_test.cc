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

#include <doctest.h>

#include <algorithm>

#include "entrec/errors.h"
#include "entrec/hash.h"
#include "entrec/text.h"
#include "entrec/vocab.h"
#include "test_util.h"

namespace entrec {
namespace {

using Strings = std::vector<std::string>;

TEST_CASE("segment without phrases keeps basic and semantic identical") {
  const Segmenter seg;
  const Segmentation s = seg.Segment("cold weather food");
  CHECK(s.basic == Strings{"cold", "weather", "food"});
  CHECK(s.semantic == s.basic);
}

TEST_CASE("segment merges dictionary phrases") {
  const Strings dict = {"cold weather"};
  const Segmentation s = Segmenter(dict).Segment("cold weather food");
  CHECK(s.basic == Strings{"cold", "weather", "food"});
  CHECK(s.semantic == Strings{"cold_weather", "food"});
  CHECK(s.semantic_span == std::vector<uint32_t>{2, 1});
}

TEST_CASE("segment splits CJK per character and merges phrases") {
  const Strings dict = {"天气"};
  const Segmentation s = Segmenter(dict).Segment("天气冷");
  CHECK(s.basic == Strings{"天", "气", "冷"});
  CHECK(s.semantic == Strings{"天气", "冷"});
}

TEST_CASE("segment lowercases ASCII and splits on punctuation") {
  const Segmentation s = Segmenter().Segment("  What's GOOD, for\tcold-weather?  ");
  CHECK(s.basic == Strings{"what", "s", "good", "for", "cold", "weather"});
}

TEST_CASE("mixed scripts split at script boundaries") {
  CHECK(SplitBasic("iphone手机壳") == Strings{"iphone", "手", "机", "壳"});
}

TEST_CASE("segment rejects queries without tokens") {
  CHECK_THROWS_AS(Segmenter().Segment("   "), Error);
  try {
    Segmenter().Segment(" ,.!? ");
    FAIL("expected EmptyQuery");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kEmptyQuery);
  }
}

TEST_CASE("longest match wins over shorter overlapping phrases") {
  const Strings dict = {"new york", "new york city", "york"};
  const PhraseMatcher matcher(dict);
  const Strings tokens = {"new", "york", "city", "york"};
  const auto matches = matcher.FindAll(tokens);
  REQUIRE(matches.size() == 2);
  CHECK(matches[0].begin == 0);
  CHECK(matches[0].length == 3);
  CHECK(dict[matches[0].phrase] == "new york city");
  CHECK(dict[matches[1].phrase] == "york");
}

TEST_CASE("segment is idempotent on its re-joined basic output") {
  const Strings dict = {"cold weather", "天气", "hot pot"};
  const Segmenter seg(dict);
  for (const char *text : {"Cold weather: HOT pot!", "天气冷 hot-pot 吃什么", "a,b;c  d"}) {
    const Segmentation first = seg.Segment(text);
    std::string joined;
    for (const std::string &t : first.basic) joined += t + " ";
    const Segmentation second = seg.Segment(joined);
    CHECK(second.basic == first.basic);
    CHECK(second.semantic == first.semantic);
  }
}

TEST_CASE("pretokenized input bypasses script rules") {
  const Segmentation s = Segmenter().SegmentPretokenized("Foo-Bar\tbaz");
  CHECK(s.basic == Strings{"Foo-Bar", "baz"});
}

TEST_CASE("FNV-1a matches the published test vectors") {
  CHECK(Fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(Fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(Fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("ngram extraction edge cases") {
  const int both[] = {2, 3};
  const int bigram[] = {2};
  CHECK(ExtractNgrams(Strings{"a"}, both, 1u << 20).empty());
  CHECK(ExtractNgrams(Strings{"a", "b", "c"}, bigram, 1u << 20).size() == 2);
}

TEST_CASE("ngram ids are frozen across runs and platforms") {
  // Values from an independent FNV-1a implementation over "a b", "b c",
  // "a b c" modulo 2^20.
  const int both[] = {2, 3};
  const auto ids = ExtractNgrams(Strings{"a", "b", "c"}, both, 1u << 20);
  CHECK(ids == std::vector<uint32_t>{211090, 128276, 869807});
  const auto small = ExtractNgrams(Strings{"a", "b", "c"}, both, 1000);
  CHECK(small == std::vector<uint32_t>{298, 684, 607});
}

TEST_CASE("ngram count is sum over orders of max(0, n - o + 1)") {
  SeededRng rng(3);
  const int both[] = {2, 3};
  for (int trial = 0; trial < 50; ++trial) {
    const size_t n = rng.UniformInt(8);
    Strings tokens;
    for (size_t i = 0; i < n; ++i) tokens.push_back("t" + std::to_string(rng.UniformInt(5)));
    const size_t expected = (n >= 2 ? n - 1 : 0) + (n >= 3 ? n - 2 : 0);
    const auto ids = ExtractNgrams(tokens, both, 97);
    CHECK(ids.size() == expected);
    for (uint32_t id : ids) CHECK(id < 97);
  }
}

std::vector<QueryEntityRecord> Records(std::initializer_list<std::pair<const char *, const char *>> rs) {
  std::vector<QueryEntityRecord> out;
  for (const auto &[q, e] : rs) out.push_back({q, e, 1.0});
  return out;
}

TEST_CASE("build_vocab: single token corpus") {
  const auto records = Records({{"a", "E1"}, {"a", "E1"}, {"a", "E1"}});
  const Vocabulary v = BuildVocab(records, Segmenter(), 1);
  REQUIRE(v.word_count() == 3);
  CHECK(v.Word(Vocabulary::kPad) == "<pad>");
  CHECK(v.Word(Vocabulary::kUnk) == "<unk>");
  CHECK(v.Word(2) == "a");
  CHECK(v.WordFreq(2) == 3);
  REQUIRE(v.entity_count() == 1);
  CHECK(v.Entity(0) == "E1");
}

TEST_CASE("build_vocab: min_count threshold maps rare tokens to UNK") {
  const auto records =
      Records({{"a b", "E"}, {"a", "E"}, {"a", "E"}, {"a", "E"}, {"a", "E"}});
  const Vocabulary v = BuildVocab(records, Segmenter(), 2);
  CHECK(v.WordId("a") == 2);
  CHECK(v.WordId("b") == Vocabulary::kUnk);
}

TEST_CASE("build_vocab: frequency ties break lexicographically") {
  const auto records = Records({{"y x", "E"}, {"y x", "E"}, {"x y", "E"}});
  const Vocabulary v = BuildVocab(records, Segmenter(), 1);
  CHECK(v.WordId("x") < v.WordId("y"));
}

TEST_CASE("build_vocab counts merged phrases as semantic tokens") {
  const Strings dict = {"cold weather"};
  const auto records = Records({{"cold weather food", "E"}});
  const Vocabulary v = BuildVocab(records, Segmenter(dict), 1);
  CHECK(v.WordId("cold_weather") != Vocabulary::kUnk);
  CHECK(v.WordId("cold") != Vocabulary::kUnk);
}

TEST_CASE("build_vocab rejects an empty corpus") {
  try {
    BuildVocab({}, Segmenter(), 1);
    FAIL("expected EmptyCorpus");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kEmptyCorpus);
  }
}

TEST_CASE("build_vocab is independent of record order") {
  SeededRng rng(11);
  std::vector<QueryEntityRecord> records;
  const Strings words = {"red", "green", "blue", "cyan", "teal", "rose"};
  for (int i = 0; i < 60; ++i) {
    std::string q = words[rng.UniformInt(words.size())] + " " + words[rng.UniformInt(words.size())];
    records.push_back({q, "E" + std::to_string(rng.UniformInt(7)), 1.0});
  }
  const Vocabulary a = BuildVocab(records, Segmenter(), 1);
  for (int trial = 0; trial < 5; ++trial) {
    Shuffle(records, rng);
    CHECK(BuildVocab(records, Segmenter(), 1) == a);
  }
}

TEST_CASE("vocabulary ids are dense bijections and survive a JSON round trip") {
  const auto records = Records({{"a b c", "E1"}, {"b c", "E2"}, {"c", "E1"}});
  const Vocabulary v = BuildVocab(records, Segmenter(), 1);
  for (size_t i = 0; i < v.word_count(); ++i) {
    CHECK(v.WordId(v.Word(static_cast<int32_t>(i))) == static_cast<int32_t>(i));
  }
  for (size_t i = 0; i < v.entity_count(); ++i) {
    CHECK(*v.EntityId(v.Entity(static_cast<int32_t>(i))) == static_cast<int32_t>(i));
  }
  testing::TempDir dir("vocab");
  v.Save(dir.File("v.json"));
  const Vocabulary loaded = Vocabulary::Load(dir.File("v.json"));
  CHECK(loaded == v);
  CHECK(loaded.Hash() == v.Hash());
}

TEST_CASE("tokenizer truncates to max_len and derives ngrams from kept tokens") {
  const auto records = Records({{"a b c d e", "E"}});
  const Vocabulary v = BuildVocab(records, Segmenter(), 1);
  const Segmenter seg;
  TokenizerOptions options;
  options.max_len = 3;
  options.num_buckets = 1u << 20;
  const Tokenizer tok(v, seg, options);
  const TokenizedQuery q = tok.Tokenize("a b c d e zz");
  CHECK(q.basic_tokens.size() == 3);
  CHECK(q.semantic_tokens.size() == 3);
  CHECK(q.basic_text == Strings{"a", "b", "c"});
  CHECK(q.ngram_ids == std::vector<uint32_t>{211090, 128276, 869807});
  const TokenizedQuery unk = tok.Tokenize("zz");
  CHECK(unk.basic_tokens == std::vector<int32_t>{Vocabulary::kUnk});
}

}  // namespace
}  // namespace entrec
