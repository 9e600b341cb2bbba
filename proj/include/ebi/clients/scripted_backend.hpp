#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ebi/clients/backend.hpp"

namespace ebi::clients {

// Replies from a fixed script. Each rule fires once, in file order, for the
// first request whose last message contains `when_contains`; `default` answers
// anything left over. Used for hand-built conversation fixtures.
struct ScriptRule {
  std::string when_contains;
  std::string response;
};

class ScriptedBackend : public ModelBackend {
 public:
  ScriptedBackend(std::vector<ScriptRule> rules, std::optional<std::string> fallback);
  static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

  std::string complete(const CompletionRequest& req) override;
  std::size_t remaining() const;

 private:
  std::vector<ScriptRule> rules_;
  std::vector<bool> used_;
  std::optional<std::string> fallback_;
  mutable std::mutex mu_;
};

}  // namespace ebi::clients
