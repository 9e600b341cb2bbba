#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ebi/clients/backend.hpp"
#include "ebi/clients/rate_limiter.hpp"

namespace ebi::clients {

struct HttpBackendConfig {
  std::string base_url;     // e.g. https://api.groq.com/openai/v1
  std::string model_name;   // provider model id; defaults to the request's model
  std::string api_key_env;  // environment variable holding the key; empty = none
  double requests_per_minute = 0.0;
  int max_retries = 5;
  std::chrono::milliseconds initial_backoff{1000};
  double backoff_factor = 2.0;
  std::chrono::seconds timeout{120};
};

struct AttemptRecord {
  int attempt = 0;  // 1-based
  int status = 0;   // HTTP status, 0 for transport failure
  std::string error;
};

// OpenAI-compatible chat-completions client. Retries 429, 5xx and transport
// failures with exponential backoff; other 4xx fail immediately.
class HttpChatBackend : public ModelBackend {
 public:
  explicit HttpChatBackend(HttpBackendConfig config);

  std::string complete(const CompletionRequest& req) override;

  std::vector<AttemptRecord> attempts() const;

 private:
  HttpBackendConfig config_;
  std::string scheme_host_;
  std::string path_prefix_;
  RateLimiter limiter_;
  mutable std::mutex log_mu_;
  std::vector<AttemptRecord> attempts_;
};

// Pulls choices[0].message.content out of a chat-completions reply body.
std::string extract_completion_text(const std::string& body);

}  // namespace ebi::clients
