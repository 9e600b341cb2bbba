#include "ebi/clients/backend.hpp"

#include "ebi/core/error.hpp"
#include "ebi/core/hashing.hpp"

namespace ebi::clients {

using nlohmann::json;

void validate(const CompletionRequest& req) {
  if (req.messages.empty()) throw ValidationError("completion request has no messages");
  if (req.call_index < 0) throw ValidationError("call index must be >= 0");
  if (req.model.empty()) throw ValidationError("completion request has no model");
}

json to_json(const CompletionRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  json params = {{"seed_policy", req.params.seed_policy}, {"base_seed", req.params.base_seed}};
  params["temperature"] = req.params.temperature ? json(*req.params.temperature) : json(nullptr);
  return {{"model", req.model}, {"messages", messages}, {"params", params}, {"call_index", req.call_index}};
}

std::string request_key(const CompletionRequest& req) { return sha256_hex(to_json(req).dump()); }

}  // namespace ebi::clients
