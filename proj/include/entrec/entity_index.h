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

#ifndef ENTREC_ENTITY_INDEX_H_
#define ENTREC_ENTITY_INDEX_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "entrec/encoder.h"
#include "entrec/matrix.h"

namespace entrec {

// Entity name -> concept names, in the order listed in the concept file.
using ConceptMap = std::unordered_map<std::string, std::vector<std::string>>;

// Concept file: one `entity \t concept1;concept2;...` per line.
ConceptMap LoadConceptMap(const std::string &path);

struct ScoredEntity {
  int32_t id = 0;
  std::string name;
  float score = 0;  // cosine similarity
};

struct IvfOptions {
  size_t num_clusters = 256;
  size_t iterations = 10;
  // k-means trains on at most this many points per cluster.
  size_t max_points_per_cluster = 256;
  uint64_t seed = 0;
  size_t threads = 1;
};

inline constexpr size_t kDefaultProbes = 8;

struct IndexMetadata {
  EncoderKind encoder = EncoderKind::kBase;
  uint64_t checkpoint_hash = 0;
  // Identifies the build configuration (not a timestamp, so rebuilding from
  // the same inputs gives the same bytes).
  std::string build_id;
};

// Immutable after construction: L2-normalized float32 entity rows, optional
// inverted-file clustering and optional concept map. Safe for concurrent
// readers.
class EntityIndex {
 public:
  EntityIndex() = default;

  // Normalizes each row. Throws ZeroNormEntity listing every zero row.
  static EntityIndex Build(const MatrixD &table, std::vector<std::string> names,
                           IndexMetadata metadata, ConceptMap concepts = {});
  static EntityIndex Build(MatrixF table, std::vector<std::string> names,
                           IndexMetadata metadata, ConceptMap concepts = {});

  // Spherical k-means over the rows; enables TopKApprox.
  void BuildClusters(const IvfOptions &options);

  size_t size() const { return names_.size(); }
  size_t dim() const { return rows_.cols(); }
  bool clustered() const { return !centroids_.empty(); }
  size_t num_clusters() const { return centroids_.rows(); }
  const IndexMetadata &metadata() const { return metadata_; }
  const MatrixF &rows() const { return rows_; }
  const std::string &name(int32_t id) const { return names_[id]; }
  const ConceptMap &concepts() const { return concepts_; }
  std::optional<int32_t> Find(std::string_view name) const;

  // Full scan. Results are sorted by descending score, ties by ascending id.
  // K larger than the index is clamped with a warning.
  std::vector<ScoredEntity> TopKExact(std::span<const float> query, size_t k) const;
  std::vector<ScoredEntity> TopKExact(std::span<const double> query, size_t k) const;

  // Scans only the `probes` clusters whose centroids score highest. Throws
  // IndexNotClustered on an unclustered index.
  std::vector<ScoredEntity> TopKApprox(std::span<const float> query, size_t k,
                                       size_t probes) const;

  // Nearest entities to a named entity, excluding itself. Throws BadFormat for
  // an unknown name.
  std::vector<ScoredEntity> Neighbors(std::string_view name, size_t n) const;

  // File layout (little-endian):
  //   bytes[8] "ENTRECIX", u32 version (1), u32 dim, u32 count,
  //   u32 encoder kind, u64 checkpoint hash, string build id,
  //   count x string names, count*dim f32 rows,
  //   u32 clusters, clusters*dim f32 centroids, per cluster u32 size + ids,
  //   u32 has_concepts, then per entity u32 n + n strings.
  void Save(const std::string &path) const;
  static EntityIndex Load(const std::string &path);
  std::string Serialize() const;

 private:
  std::vector<float> Normalized(std::span<const float> query) const;
  std::vector<ScoredEntity> Finish(std::vector<std::pair<float, int32_t>> heap) const;

  MatrixF rows_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, int32_t> ids_;
  IndexMetadata metadata_;
  ConceptMap concepts_;
  MatrixF centroids_;
  std::vector<std::vector<int32_t>> lists_;
};

struct ConceptGroup {
  std::string concept_name;
  std::vector<ScoredEntity> members;
};

inline constexpr const char *kOtherConcept = "other";

// Groups ranked results by concept. Each entity joins the one of its concepts
// whose best-scoring candidate ranks highest; entities without concepts go to
// "other". Groups are ordered by their best member, members keep input order.
std::vector<ConceptGroup> GroupByConcept(std::span<const ScoredEntity> results,
                                         const ConceptMap &concepts);

}  // namespace entrec

#endif  // ENTREC_ENTITY_INDEX_H_
