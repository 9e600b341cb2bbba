#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "ebi/core/specs.hpp"

namespace ebi::clients {

struct Message {
  std::string role;  // system | user | assistant
  std::string content;

  bool operator==(const Message&) const = default;
};

struct CompletionRequest {
  std::string model;
  std::vector<Message> messages;
  SamplingParams params;
  std::int64_t call_index = 0;  // distinguishes repeated identical prompts
};

void validate(const CompletionRequest& req);

// Canonical JSON of every request field; the cache key hashes exactly this.
nlohmann::json to_json(const CompletionRequest& req);
std::string request_key(const CompletionRequest& req);

class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  // Must be safe to call concurrently.
  virtual std::string complete(const CompletionRequest& req) = 0;
};

using BackendPtr = std::shared_ptr<ModelBackend>;

}  // namespace ebi::clients
