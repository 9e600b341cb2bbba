#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ebi/clients/backend.hpp"
#include "ebi/core/dataset.hpp"
#include "ebi/core/matrix.hpp"
#include "ebi/core/run_store.hpp"
#include "ebi/core/specs.hpp"
#include "ebi/protocol/templates.hpp"

namespace ebi::protocol {

// s-matrix calls are numbered from here so that a system using the same
// prompt for c and s still gets independent samples.
inline constexpr std::int64_t kWeightCallOffset = 1'000'000;

// One model call, as written to raw/system_<id>.jsonl.
struct RawRecord {
  int system_id = 0;
  std::string role;  // "c" or "s"
  std::string model;
  int ptype = 1;
  int block_id = 0;
  std::optional<IdB> target_b;  // Type 1 only
  std::int64_t call_index = 0;
  std::string prompt_hash;
  std::string response_text;
  std::string timestamp;
};

nlohmann::json to_json(const RawRecord& r);
RawRecord raw_record_from_json(const nlohmann::json& j);
std::string raw_path(int system_id);

struct CollectOptions {
  std::string kind = "generic";
  std::string language = "en";
  int concurrency = 1;
  const TemplateStore* templates = nullptr;  // builtin() when null
  RunStore* store = nullptr;                 // enables raw JSONL and resume
};

struct CollectResult {
  SubjectiveDegreeMatrix c;
  WeightMatrix s;
  int c_parse_failures = 0;
  int s_parse_failures = 0;
  long issued = 0;   // calls sent to a backend in this invocation
  long resumed = 0;  // calls taken from an existing raw file
};

// Runs both protocols of one system over the dataset. On a backend error the
// raw file keeps every finished call and the error is rethrown; a rerun only
// issues what is missing.
CollectResult collect_system(const SystemSpec& system, const ProfileDataset& dataset,
                             const clients::BackendPtr& c_backend, const clients::BackendPtr& s_backend,
                             const CollectOptions& options = {});

// Number of calls a protocol issues on the dataset.
long planned_calls(const PromptProtocol& proto, const ProfileDataset& dataset);

}  // namespace ebi::protocol
