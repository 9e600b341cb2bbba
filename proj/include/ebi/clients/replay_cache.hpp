#pragma once

#include <atomic>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "ebi/clients/backend.hpp"

namespace ebi::clients {

enum class ReplayMode {
  off,     // no cache
  record,  // always call through, overwrite cache
  replay,  // serve hits, call through and store on miss
  strict,  // serve hits, a miss is an error; never calls through
};

ReplayMode parse_replay_mode(const std::string& s);
std::string to_string(ReplayMode mode);

// Directory of <request-hash>.json files. Reads may run concurrently; writes
// are serialised.
class ReplayCache {
 public:
  explicit ReplayCache(std::filesystem::path dir);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const CompletionRequest& req, const std::string& response);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex write_mu_;
};

class CachingBackend : public ModelBackend {
 public:
  CachingBackend(BackendPtr inner, std::shared_ptr<ReplayCache> cache, ReplayMode mode);

  std::string complete(const CompletionRequest& req) override;

  long hits() const { return hits_; }
  long inner_calls() const { return inner_calls_; }

 private:
  BackendPtr inner_;
  std::shared_ptr<ReplayCache> cache_;
  ReplayMode mode_;
  std::atomic<long> hits_{0};
  std::atomic<long> inner_calls_{0};
};

}  // namespace ebi::clients
