#include "ebi/clients/replay_cache.hpp"

#include "ebi/core/error.hpp"
#include "ebi/core/hashing.hpp"

namespace ebi::clients {

namespace fs = std::filesystem;
using nlohmann::json;

ReplayMode parse_replay_mode(const std::string& s) {
  if (s == "off") return ReplayMode::off;
  if (s == "record") return ReplayMode::record;
  if (s == "replay") return ReplayMode::replay;
  if (s == "strict") return ReplayMode::strict;
  throw ValidationError("unknown replay mode '" + s + "' (off|record|replay|strict)");
}

std::string to_string(ReplayMode mode) {
  switch (mode) {
    case ReplayMode::off: return "off";
    case ReplayMode::record: return "record";
    case ReplayMode::replay: return "replay";
    case ReplayMode::strict: return "strict";
  }
  return "?";
}

ReplayCache::ReplayCache(fs::path dir) : dir_(std::move(dir)) {}

std::optional<std::string> ReplayCache::lookup(const std::string& key) const {
  const auto path = dir_ / (key + ".json");
  if (!fs::exists(path)) return std::nullopt;
  try {
    const auto j = json::parse(read_file(path));
    return j.at("response").get<std::string>();
  } catch (const json::exception& e) {
    throw IoError("corrupt cache entry " + path.string() + ": " + e.what());
  }
}

void ReplayCache::store(const std::string& key, const CompletionRequest& req, const std::string& response) {
  json j{{"key", key}, {"request", to_json(req)}, {"response", response}};
  std::lock_guard lock(write_mu_);
  write_file_atomic(dir_ / (key + ".json"), j.dump(1) + "\n");
}

CachingBackend::CachingBackend(BackendPtr inner, std::shared_ptr<ReplayCache> cache, ReplayMode mode)
    : inner_(std::move(inner)), cache_(std::move(cache)), mode_(mode) {}

std::string CachingBackend::complete(const CompletionRequest& req) {
  validate(req);
  if (mode_ == ReplayMode::off) {
    ++inner_calls_;
    return inner_->complete(req);
  }
  const std::string key = request_key(req);
  if (mode_ != ReplayMode::record) {
    if (auto hit = cache_->lookup(key)) {
      ++hits_;
      return *hit;
    }
    if (mode_ == ReplayMode::strict) {
      throw CacheMissError("strict replay: no cached response for key " + key + " (model " +
                           req.model + ", call " + std::to_string(req.call_index) + ")");
    }
  }
  ++inner_calls_;
  auto response = inner_->complete(req);
  cache_->store(key, req, response);
  return response;
}

}  // namespace ebi::clients
