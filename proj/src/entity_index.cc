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

#include "entrec/entity_index.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "entrec/errors.h"
#include "entrec/hash.h"
#include "entrec/io.h"
#include "entrec/rng.h"

namespace entrec {
namespace {

constexpr char kMagic[] = "ENTRECIX";
constexpr uint32_t kIndexVersion = 1;

using Candidate = std::pair<float, int32_t>;

// True if a ranks ahead of b.
bool Better(const Candidate &a, const Candidate &b) {
  return a.first > b.first || (a.first == b.first && a.second < b.second);
}

void Offer(std::vector<Candidate> &heap, size_t k, Candidate c) {
  if (heap.size() < k) {
    heap.push_back(c);
    std::push_heap(heap.begin(), heap.end(), Better);
  } else if (Better(c, heap.front())) {
    std::pop_heap(heap.begin(), heap.end(), Better);
    heap.back() = c;
    std::push_heap(heap.begin(), heap.end(), Better);
  }
}

size_t ClampK(size_t k, size_t size) {
  if (k > size) {
    spdlog::warn("KExceedsVocab: K={} exceeds index size {}, clamping", k, size);
    return size;
  }
  return k;
}

// Best-scoring centroid for each row in [begin, end).
void AssignRange(const MatrixF &points, std::span<const size_t> ids,
                 const MatrixF &centroids, std::vector<uint32_t> &out,
                 size_t begin, size_t end) {
  const size_t dim = points.cols();
  for (size_t i = begin; i < end; ++i) {
    const float *p = points.row(ids.empty() ? i : ids[i]).data();
    float best = -INFINITY;
    uint32_t best_c = 0;
    for (size_t c = 0; c < centroids.rows(); ++c) {
      const float s = DotFloat(p, centroids.row(c).data(), dim);
      if (s > best) {
        best = s;
        best_c = static_cast<uint32_t>(c);
      }
    }
    out[i] = best_c;
  }
}

std::vector<uint32_t> Assign(const MatrixF &points, std::span<const size_t> ids,
                             const MatrixF &centroids, size_t threads) {
  const size_t n = ids.empty() ? points.rows() : ids.size();
  std::vector<uint32_t> out(n);
  threads = std::max<size_t>(1, std::min(threads, n / 1024 + 1));
  if (threads == 1) {
    AssignRange(points, ids, centroids, out, 0, n);
    return out;
  }
  std::vector<std::thread> workers;
  const size_t chunk = (n + threads - 1) / threads;
  for (size_t t = 0; t < threads; ++t) {
    const size_t begin = t * chunk;
    const size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back(AssignRange, std::cref(points), ids, std::cref(centroids),
                         std::ref(out), begin, end);
  }
  for (std::thread &w : workers) w.join();
  return out;
}

}  // namespace

ConceptMap LoadConceptMap(const std::string &path) {
  ConceptMap concepts;
  const std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    const std::vector<std::string> fields = SplitTabs(lines[i]);
    if (fields.size() != 2) {
      throw Error(ErrorCode::kBadFormat,
                  path + ":" + std::to_string(i + 1) + ": expected entity<TAB>concepts");
    }
    auto &list = concepts[fields[0]];
    for (const std::string &c : SplitOn(fields[1], ';')) {
      const std::string concept_name = Trim(c);
      if (!concept_name.empty()) list.push_back(concept_name);
    }
  }
  return concepts;
}

EntityIndex EntityIndex::Build(const MatrixD &table, std::vector<std::string> names,
                               IndexMetadata metadata, ConceptMap concepts) {
  MatrixF rows(table.rows(), table.cols());
  std::vector<std::string> zero;
  for (size_t r = 0; r < table.rows(); ++r) {
    const double norm = L2Norm(table.row(r));
    if (!(norm > 0) || !std::isfinite(norm)) {
      zero.push_back(r < names.size() ? names[r] : std::to_string(r));
      continue;
    }
    for (size_t c = 0; c < table.cols(); ++c) {
      rows(r, c) = static_cast<float>(table(r, c) / norm);
    }
  }
  if (!zero.empty()) {
    std::string list;
    for (const std::string &z : zero) list += (list.empty() ? "" : ", ") + z;
    throw Error(ErrorCode::kZeroNormEntity, "entities with zero-norm embeddings: " + list);
  }
  EntityIndex index;
  index.rows_ = std::move(rows);
  index.names_ = std::move(names);
  index.metadata_ = std::move(metadata);
  index.concepts_ = std::move(concepts);
  if (index.names_.size() != index.rows_.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "entity names and rows differ in count");
  }
  for (size_t i = 0; i < index.names_.size(); ++i) {
    index.ids_.emplace(index.names_[i], static_cast<int32_t>(i));
  }
  return index;
}

EntityIndex EntityIndex::Build(MatrixF table, std::vector<std::string> names,
                               IndexMetadata metadata, ConceptMap concepts) {
  std::vector<std::string> zero;
  for (size_t r = 0; r < table.rows(); ++r) {
    auto row = table.row(r);
    double sq = 0;
    for (float v : row) sq += static_cast<double>(v) * v;
    const double norm = std::sqrt(sq);
    if (!(norm > 0) || !std::isfinite(norm)) {
      zero.push_back(r < names.size() ? names[r] : std::to_string(r));
      continue;
    }
    for (float &v : row) v = static_cast<float>(v / norm);
  }
  if (!zero.empty()) {
    throw Error(ErrorCode::kZeroNormEntity,
                std::to_string(zero.size()) + " zero-norm entities, first: " + zero[0]);
  }
  if (names.size() != table.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "entity names and rows differ in count");
  }
  EntityIndex index;
  index.rows_ = std::move(table);
  index.names_ = std::move(names);
  index.metadata_ = std::move(metadata);
  index.concepts_ = std::move(concepts);
  index.ids_.reserve(index.names_.size());
  for (size_t i = 0; i < index.names_.size(); ++i) {
    index.ids_.emplace(index.names_[i], static_cast<int32_t>(i));
  }
  return index;
}

void EntityIndex::BuildClusters(const IvfOptions &options) {
  const size_t n = size();
  const size_t dim = this->dim();
  if (n == 0) return;
  const size_t clusters = std::max<size_t>(1, std::min(options.num_clusters, n));
  SeededRng rng(options.seed);

  // Training sample: a seeded partial shuffle of the row ids.
  std::vector<size_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  const size_t sample =
      std::min(n, std::max(clusters, clusters * options.max_points_per_cluster));
  for (size_t i = 0; i < sample; ++i) {
    std::swap(ids[i], ids[i + rng.UniformInt(n - i)]);
  }
  ids.resize(sample);

  MatrixF centroids(clusters, dim);
  for (size_t c = 0; c < clusters; ++c) {
    std::copy_n(rows_.row(ids[c]).begin(), dim, centroids.row(c).begin());
  }
  std::vector<double> sums(clusters * dim);
  std::vector<size_t> counts(clusters);
  for (size_t iter = 0; iter < options.iterations; ++iter) {
    const std::vector<uint32_t> assign = Assign(rows_, ids, centroids, options.threads);
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (size_t i = 0; i < sample; ++i) {
      const auto row = rows_.row(ids[i]);
      double *s = sums.data() + assign[i] * dim;
      for (size_t j = 0; j < dim; ++j) s[j] += row[j];
      ++counts[assign[i]];
    }
    for (size_t c = 0; c < clusters; ++c) {
      const double *s = sums.data() + c * dim;
      double sq = 0;
      for (size_t j = 0; j < dim; ++j) sq += s[j] * s[j];
      if (counts[c] == 0 || !(sq > 0)) {
        // Empty cluster: restart it from a random training point.
        const auto row = rows_.row(ids[rng.UniformInt(sample)]);
        std::copy(row.begin(), row.end(), centroids.row(c).begin());
        continue;
      }
      const double inv = 1.0 / std::sqrt(sq);
      for (size_t j = 0; j < dim; ++j) centroids(c, j) = static_cast<float>(s[j] * inv);
    }
  }

  const std::vector<uint32_t> assign = Assign(rows_, {}, centroids, options.threads);
  lists_.assign(clusters, {});
  for (size_t i = 0; i < n; ++i) lists_[assign[i]].push_back(static_cast<int32_t>(i));
  centroids_ = std::move(centroids);
}

std::optional<int32_t> EntityIndex::Find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<float> EntityIndex::Normalized(std::span<const float> query) const {
  if (query.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query has dimension " + std::to_string(query.size()) +
                    ", index has " + std::to_string(dim()));
  }
  double sq = 0;
  for (float v : query) sq += static_cast<double>(v) * v;
  std::vector<float> q(query.begin(), query.end());
  if (sq > 0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (float &v : q) v = static_cast<float>(v * inv);
  }
  return q;
}

std::vector<ScoredEntity> EntityIndex::Finish(std::vector<Candidate> heap) const {
  std::sort_heap(heap.begin(), heap.end(), Better);
  std::vector<ScoredEntity> out;
  out.reserve(heap.size());
  for (const Candidate &c : heap) out.push_back({c.second, names_[c.second], c.first});
  return out;
}

std::vector<ScoredEntity> EntityIndex::TopKExact(std::span<const float> query,
                                                 size_t k) const {
  k = ClampK(k, size());
  const std::vector<float> q = Normalized(query);
  std::vector<Candidate> heap;
  heap.reserve(k + 1);
  if (k == 0) return {};
  const size_t d = dim();
  for (size_t i = 0; i < size(); ++i) {
    Offer(heap, k, {DotFloat(q.data(), rows_.row(i).data(), d), static_cast<int32_t>(i)});
  }
  return Finish(std::move(heap));
}

std::vector<ScoredEntity> EntityIndex::TopKExact(std::span<const double> query,
                                                 size_t k) const {
  std::vector<float> q(query.begin(), query.end());
  return TopKExact(std::span<const float>(q), k);
}

std::vector<ScoredEntity> EntityIndex::TopKApprox(std::span<const float> query,
                                                  size_t k, size_t probes) const {
  if (!clustered()) {
    throw Error(ErrorCode::kIndexNotClustered, "index was built without clusters");
  }
  k = ClampK(k, size());
  const std::vector<float> q = Normalized(query);
  const size_t d = dim();
  probes = std::clamp<size_t>(probes, 1, num_clusters());
  std::vector<Candidate> cluster_heap;
  for (size_t c = 0; c < num_clusters(); ++c) {
    Offer(cluster_heap, probes,
          {DotFloat(q.data(), centroids_.row(c).data(), d), static_cast<int32_t>(c)});
  }
  std::vector<Candidate> heap;
  heap.reserve(k + 1);
  if (k == 0) return {};
  for (const Candidate &cluster : cluster_heap) {
    for (int32_t id : lists_[cluster.second]) {
      Offer(heap, k, {DotFloat(q.data(), rows_.row(id).data(), d), id});
    }
  }
  return Finish(std::move(heap));
}

std::vector<ScoredEntity> EntityIndex::Neighbors(std::string_view name, size_t n) const {
  const auto id = Find(name);
  if (!id) throw Error(ErrorCode::kBadFormat, "unknown entity '" + std::string(name) + "'");
  std::vector<ScoredEntity> out = TopKExact(rows_.row(*id), std::min(n + 1, size()));
  std::erase_if(out, [&](const ScoredEntity &e) { return e.id == *id; });
  if (out.size() > n) out.resize(n);
  return out;
}

std::string EntityIndex::Serialize() const {
  std::ostringstream buffer;
  BinaryWriter w(buffer);
  w.WriteBytes(std::string_view(kMagic, 8));
  w.WriteU32(kIndexVersion);
  w.WriteU32(static_cast<uint32_t>(dim()));
  w.WriteU32(static_cast<uint32_t>(size()));
  w.WriteU32(static_cast<uint32_t>(metadata_.encoder));
  w.WriteU64(metadata_.checkpoint_hash);
  w.WriteString(metadata_.build_id);
  for (const std::string &name : names_) w.WriteString(name);
  for (float v : rows_.values()) w.WriteF32(v);
  w.WriteU32(static_cast<uint32_t>(num_clusters()));
  for (float v : centroids_.values()) w.WriteF32(v);
  for (const auto &list : lists_) {
    w.WriteU32(static_cast<uint32_t>(list.size()));
    for (int32_t id : list) w.WriteU32(static_cast<uint32_t>(id));
  }
  w.WriteU32(concepts_.empty() ? 0 : 1);
  if (!concepts_.empty()) {
    for (const std::string &name : names_) {
      auto it = concepts_.find(name);
      if (it == concepts_.end()) {
        w.WriteU32(0);
        continue;
      }
      w.WriteU32(static_cast<uint32_t>(it->second.size()));
      for (const std::string &c : it->second) w.WriteString(c);
    }
  }
  return buffer.str();
}

void EntityIndex::Save(const std::string &path) const { WriteFile(path, Serialize()); }

EntityIndex EntityIndex::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInputMissing, "cannot open index " + path);
  BinaryReader r(in, path);
  if (r.ReadBytes(8) != std::string_view(kMagic, 8)) r.Fail("not an index file");
  if (r.ReadU32() != kIndexVersion) r.Fail("unsupported index version");
  const size_t dim = r.ReadU32();
  const size_t count = r.ReadU32();
  IndexMetadata meta;
  const uint32_t kind = r.ReadU32();
  if (kind > 1) r.Fail("unknown encoder kind");
  meta.encoder = static_cast<EncoderKind>(kind);
  meta.checkpoint_hash = r.ReadU64();
  meta.build_id = r.ReadString();
  std::vector<std::string> names(count);
  for (std::string &name : names) name = r.ReadString();
  MatrixF rows(count, dim);
  {
    const std::string blob = r.ReadBytes(rows.size() * 4);
    auto values = rows.values();
    for (size_t i = 0; i < values.size(); ++i) {
      uint32_t bits = 0;
      for (int b = 3; b >= 0; --b) {
        bits = (bits << 8) | static_cast<unsigned char>(blob[i * 4 + b]);
      }
      values[i] = std::bit_cast<float>(bits);
    }
  }
  EntityIndex index;
  index.rows_ = std::move(rows);
  index.names_ = std::move(names);
  index.metadata_ = std::move(meta);
  for (size_t i = 0; i < index.names_.size(); ++i) {
    index.ids_.emplace(index.names_[i], static_cast<int32_t>(i));
  }
  const size_t clusters = r.ReadU32();
  index.centroids_ = MatrixF(clusters, dim);
  for (float &v : index.centroids_.values()) v = r.ReadF32();
  index.lists_.resize(clusters);
  for (auto &list : index.lists_) {
    list.resize(r.ReadU32());
    for (int32_t &id : list) {
      id = static_cast<int32_t>(r.ReadU32());
      if (static_cast<size_t>(id) >= count) r.Fail("cluster member out of range");
    }
  }
  if (r.ReadU32() != 0) {
    for (const std::string &name : index.names_) {
      const uint32_t n = r.ReadU32();
      if (n == 0) continue;
      auto &list = index.concepts_[name];
      for (uint32_t i = 0; i < n; ++i) list.push_back(r.ReadString());
    }
  }
  return index;
}

std::vector<ConceptGroup> GroupByConcept(std::span<const ScoredEntity> results,
                                         const ConceptMap &concepts) {
  // Rank of each concept = position of its first (best) candidate.
  std::unordered_map<std::string, size_t> concept_rank;
  for (size_t i = 0; i < results.size(); ++i) {
    auto it = concepts.find(results[i].name);
    if (it == concepts.end()) continue;
    for (const std::string &c : it->second) concept_rank.emplace(c, i);
  }
  std::vector<ConceptGroup> groups;
  std::unordered_map<std::string, size_t> group_of;
  for (const ScoredEntity &e : results) {
    std::string chosen = kOtherConcept;
    auto it = concepts.find(e.name);
    if (it != concepts.end() && !it->second.empty()) {
      size_t best = SIZE_MAX;
      for (const std::string &c : it->second) {
        const size_t rank = concept_rank.at(c);
        if (rank < best) {
          best = rank;
          chosen = c;
        }
      }
    }
    auto [slot, inserted] = group_of.emplace(chosen, groups.size());
    if (inserted) groups.push_back({chosen, {}});
    groups[slot->second].members.push_back(e);
  }
  // Groups were created in order of their first member, which is their best
  // member because results arrive sorted by score.
  return groups;
}

}  // namespace entrec
