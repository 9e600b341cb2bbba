#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "ebi/clients/http_backend.hpp"

#include <cstdlib>
#include <iostream>
#include <thread>

#include "httplib.h"
#include "ebi/core/error.hpp"

namespace ebi::clients {

using nlohmann::json;

namespace {

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

}  // namespace

std::string extract_completion_text(const std::string& body) {
  try {
    const auto j = json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw BackendError("malformed backend reply: content is not a string");
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed backend reply: ") + e.what());
  }
}

HttpChatBackend::HttpChatBackend(HttpBackendConfig config)
    : config_(std::move(config)), limiter_(config_.requests_per_minute) {
  const auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ValidationError("base_url must include a scheme: " + config_.base_url);
  }
  const auto path_start = config_.base_url.find('/', scheme_end + 3);
  scheme_host_ = config_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::vector<AttemptRecord> HttpChatBackend::attempts() const {
  std::lock_guard lock(log_mu_);
  return attempts_;
}

std::string HttpChatBackend::complete(const CompletionRequest& req) {
  validate(req);
  std::string api_key;
  if (!config_.api_key_env.empty()) {
    const char* v = std::getenv(config_.api_key_env.c_str());
    if (!v || !*v) throw BackendError("environment variable " + config_.api_key_env + " is not set");
    api_key = v;
  }

  json body{{"model", config_.model_name.empty() ? req.model : config_.model_name}};
  json messages = json::array();
  for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  body["messages"] = messages;
  if (req.params.temperature) body["temperature"] = *req.params.temperature;
  if (req.params.seed_policy == "call_index") body["seed"] = req.params.base_seed + req.call_index;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  auto backoff = config_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    limiter_.acquire();
    httplib::Client client(scheme_host_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    auto res = client.Post(path_prefix_ + "/chat/completions", headers, payload, "application/json");

    AttemptRecord rec{attempt, res ? res->status : 0, res ? "" : httplib::to_string(res.error())};
    {
      std::lock_guard lock(log_mu_);
      attempts_.push_back(rec);
    }
    if (res && res->status == 200) return extract_completion_text(res->body);
    if (!retryable(rec.status)) {
      throw BackendError("HTTP " + std::to_string(rec.status) + " from " + config_.base_url + ": " +
                         res->body.substr(0, 200));
    }
    if (attempt > config_.max_retries) {
      throw BackendError("retry cap exceeded after " + std::to_string(attempt) + " attempts to " +
                         config_.base_url + " (last status " + std::to_string(rec.status) + ")");
    }
    auto wait = backoff;
    if (res && res->has_header("Retry-After")) {
      const auto secs = std::atof(res->get_header_value("Retry-After").c_str());
      wait = std::max(wait, std::chrono::milliseconds(static_cast<long>(secs * 1000)));
    }
    std::cerr << "ebi: " << config_.base_url << " attempt " << attempt << " got status "
              << rec.status << ", retrying in " << wait.count() << " ms\n";
    std::this_thread::sleep_for(wait);
    backoff = std::chrono::milliseconds(static_cast<long>(backoff.count() * config_.backoff_factor));
  }
}

}  // namespace ebi::clients
