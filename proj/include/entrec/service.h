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

#ifndef ENTREC_SERVICE_H_
#define ENTREC_SERVICE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "entrec/entity_index.h"
#include "entrec/model.h"
#include "entrec/text.h"
#include "entrec/vocab.h"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace entrec {

struct ServeOptions {
  bool use_approx = true;  // falls back to exact search on unclustered indexes
  size_t probes = kDefaultProbes;
  size_t default_k = 10;
  size_t default_n = 10;
  size_t threads = 8;
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

// Query tower plus entity index behind an HTTP/1.1 JSON API:
//   GET /recommend?q=<text>&k=<int>&grouped=<bool>
//   GET /similar?entity=<name>&n=<int>
//   GET /healthz
// Immutable after construction; handlers may run concurrently.
class RecommendService {
 public:
  // Throws HashMismatch when the index was not built from this checkpoint
  // (kind or content hash) or the dimensions disagree.
  RecommendService(Model model, Vocabulary vocab, Segmenter segmenter, EntityIndex index,
                   uint64_t checkpoint_hash, uint64_t index_hash, ServeOptions options = {});
  ~RecommendService();

  ServiceResponse Recommend(std::string_view query, std::optional<size_t> k,
                            bool grouped) const;
  ServiceResponse Similar(std::string_view entity, std::optional<size_t> n) const;
  ServiceResponse Health() const;

  // Binds and serves until Stop(). Returns false if binding fails.
  bool Listen(const std::string &host, int port);
  // Binds to a free port and returns it; serving starts with ListenAfterBind.
  int BindToAnyPort(const std::string &host);
  bool ListenAfterBind();
  void Stop();

  const EntityIndex &index() const { return index_; }

 private:
  void Route();

  Model model_;
  Vocabulary vocab_;
  Segmenter segmenter_;
  EntityIndex index_;
  Tokenizer tokenizer_;
  uint64_t index_hash_;
  ServeOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace entrec

#endif  // ENTREC_SERVICE_H_
