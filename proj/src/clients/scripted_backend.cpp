#include "ebi/clients/scripted_backend.hpp"

#include "ebi/core/error.hpp"
#include "ebi/core/hashing.hpp"

namespace ebi::clients {

using nlohmann::json;

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules, std::optional<std::string> fallback)
    : rules_(std::move(rules)), used_(rules_.size(), false), fallback_(std::move(fallback)) {}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
  try {
    const auto j = json::parse(read_file(path));
    std::vector<ScriptRule> rules;
    for (const auto& r : j.at("rules")) {
      rules.push_back({r.value("when_contains", std::string{}), r.at("response").get<std::string>()});
    }
    std::optional<std::string> fallback;
    if (j.contains("default")) fallback = j["default"].get<std::string>();
    return std::make_shared<ScriptedBackend>(std::move(rules), std::move(fallback));
  } catch (const json::exception& e) {
    throw ValidationError("invalid script " + path.string() + ": " + e.what());
  }
}

std::string ScriptedBackend::complete(const CompletionRequest& req) {
  validate(req);
  const std::string& prompt = req.messages.back().content;
  std::lock_guard lock(mu_);
  for (std::size_t k = 0; k < rules_.size(); ++k) {
    if (!used_[k] && prompt.find(rules_[k].when_contains) != std::string::npos) {
      used_[k] = true;
      return rules_[k].response;
    }
  }
  if (fallback_) return *fallback_;
  throw BackendError("script exhausted: no rule matches request " + std::to_string(req.call_index));
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (bool u : used_) n += !u;
  return n;
}

}  // namespace ebi::clients
