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

#include "entrec/service.h"

#include <chrono>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "entrec/errors.h"
#include "entrec/hash.h"

namespace entrec {
namespace {

using Clock = std::chrono::steady_clock;

double MsSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

ServiceResponse Fail(int status, std::string_view error, const std::string &message) {
  return {status, {{"error", error}, {"message", message}}};
}

// Positive integer parameter; nullopt if absent, error text if malformed.
std::optional<size_t> ParseCount(const httplib::Request &req, const char *name,
                                 std::string *error) {
  if (!req.has_param(name)) return std::nullopt;
  const std::string value = req.get_param_value(name);
  size_t pos = 0;
  long long parsed = 0;
  try {
    parsed = std::stoll(value, &pos);
  } catch (const std::exception &) {
    pos = 0;
  }
  if (pos != value.size() || value.empty() || parsed < 1) {
    *error = std::string(name) + " must be a positive integer";
    return std::nullopt;
  }
  return static_cast<size_t>(parsed);
}

nlohmann::json ResultsJson(const std::vector<ScoredEntity> &results) {
  nlohmann::json out = nlohmann::json::array();
  for (const ScoredEntity &e : results) out.push_back({{"entity", e.name}, {"score", e.score}});
  return out;
}

}  // namespace

RecommendService::RecommendService(Model model, Vocabulary vocab, Segmenter segmenter,
                                   EntityIndex index, uint64_t checkpoint_hash,
                                   uint64_t index_hash, ServeOptions options)
    : model_(std::move(model)),
      vocab_(std::move(vocab)),
      segmenter_(std::move(segmenter)),
      index_(std::move(index)),
      tokenizer_(vocab_, segmenter_, model_.tokenizer),
      index_hash_(index_hash),
      options_(options) {
  const IndexMetadata &meta = index_.metadata();
  if (meta.encoder != model_.kind()) {
    throw Error(ErrorCode::kHashMismatch,
                "index was built for a " + std::string(EncoderKindName(meta.encoder)) +
                    " checkpoint, serving a " + std::string(EncoderKindName(model_.kind())));
  }
  if (meta.checkpoint_hash != checkpoint_hash) {
    throw Error(ErrorCode::kHashMismatch, "index checkpoint hash " + HashHex(meta.checkpoint_hash) +
                                              " != served checkpoint " + HashHex(checkpoint_hash));
  }
  if (index_.dim() != model_.dim()) {
    throw Error(ErrorCode::kHashMismatch, "index dimension differs from the query tower");
  }
  if (options_.use_approx && !index_.clustered()) {
    spdlog::warn("index has no clusters; serving exact search");
    options_.use_approx = false;
  }
}

RecommendService::~RecommendService() = default;

ServiceResponse RecommendService::Recommend(std::string_view query, std::optional<size_t> k,
                                            bool grouped) const {
  const size_t top = k.value_or(options_.default_k);
  const auto embed_start = Clock::now();
  std::vector<float> q;
  try {
    const std::vector<double> v = model_.encoder->Encode(tokenizer_.Tokenize(query));
    q.assign(v.begin(), v.end());
  } catch (const Error &err) {
    if (err.code() == ErrorCode::kEmptyQuery) return Fail(400, "EmptyQuery", err.what());
    throw;
  }
  const double embed_ms = MsSince(embed_start);

  const auto retrieve_start = Clock::now();
  const std::vector<ScoredEntity> results = options_.use_approx
                                                ? index_.TopKApprox(q, top, options_.probes)
                                                : index_.TopKExact(std::span<const float>(q), top);
  nlohmann::json items;
  if (grouped) {
    items = nlohmann::json::array();
    for (const ConceptGroup &group : GroupByConcept(results, index_.concepts())) {
      for (const ScoredEntity &e : group.members) {
        items.push_back({{"entity", e.name}, {"score", e.score}, {"concept", group.concept_name}});
      }
    }
  } else {
    items = ResultsJson(results);
  }
  const double retrieve_ms = MsSince(retrieve_start);
  return {200,
          {{"query", std::string(query)},
           {"results", std::move(items)},
           {"embed_ms", embed_ms},
           {"retrieve_ms", retrieve_ms}}};
}

ServiceResponse RecommendService::Similar(std::string_view entity, std::optional<size_t> n) const {
  if (!index_.Find(entity)) {
    return Fail(404, "UnknownEntity", "no entity named '" + std::string(entity) + "'");
  }
  const auto start = Clock::now();
  const std::vector<ScoredEntity> results = index_.Neighbors(entity, n.value_or(options_.default_n));
  return {200,
          {{"entity", std::string(entity)},
           {"results", ResultsJson(results)},
           {"retrieve_ms", MsSince(start)}}};
}

ServiceResponse RecommendService::Health() const {
  return {200,
          {{"status", "ok"},
           {"vocab_size", vocab_.word_count()},
           {"entity_count", index_.size()},
           {"index_hash", HashHex(index_hash_)}}};
}

void RecommendService::Route() {
  if (server_) return;
  server_ = std::make_unique<httplib::Server>();
  const size_t threads = std::max<size_t>(1, options_.threads);
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  auto reply = [](httplib::Response &res, const ServiceResponse &r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server_->Get("/recommend", [this, reply](const httplib::Request &req, httplib::Response &res) {
    std::string error;
    const std::optional<size_t> k = ParseCount(req, "k", &error);
    if (!error.empty()) return reply(res, Fail(400, "BadParameter", error));
    const std::string q = req.get_param_value("q");
    const std::string g = req.get_param_value("grouped");
    if (!g.empty() && g != "true" && g != "false" && g != "1" && g != "0") {
      return reply(res, Fail(400, "BadParameter", "grouped must be a boolean"));
    }
    reply(res, Recommend(q, k, g == "true" || g == "1"));
  });
  server_->Get("/similar", [this, reply](const httplib::Request &req, httplib::Response &res) {
    std::string error;
    const std::optional<size_t> n = ParseCount(req, "n", &error);
    if (!error.empty()) return reply(res, Fail(400, "BadParameter", error));
    if (!req.has_param("entity")) return reply(res, Fail(400, "BadParameter", "entity is required"));
    reply(res, Similar(req.get_param_value("entity"), n));
  });
  server_->Get("/healthz", [this, reply](const httplib::Request &, httplib::Response &res) {
    reply(res, Health());
  });
  server_->set_exception_handler(
      [reply](const httplib::Request &, httplib::Response &res, std::exception_ptr ep) {
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception &e) {
          reply(res, Fail(500, "Internal", e.what()));
        }
      });
}

bool RecommendService::Listen(const std::string &host, int port) {
  Route();
  spdlog::info("serving on {}:{}", host, port);
  return server_->listen(host, port);
}

int RecommendService::BindToAnyPort(const std::string &host) {
  Route();
  return server_->bind_to_any_port(host);
}

bool RecommendService::ListenAfterBind() { return server_->listen_after_bind(); }

void RecommendService::Stop() {
  if (server_) server_->stop();
}

}  // namespace entrec
