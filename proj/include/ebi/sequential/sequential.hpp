#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ebi/clients/backend.hpp"
#include "ebi/core/dataset.hpp"
#include "ebi/core/specs.hpp"
#include "ebi/protocol/templates.hpp"

namespace ebi::sequential {

struct SequentialConfig {
  int recursion_threshold = 2;
  int max_conflict_iterations = 10;
  // Demographic keys used to build each Aset. Empty = no filtering.
  std::vector<std::string> attribute_keys;
  // Extra feedback-and-retry rounds for an S2 answer outside the pool. 0 = off.
  int feedback_retries = 0;
  std::string model = "sequential";
  SamplingParams sampling;
  std::string kind = "generic";
  std::string language = "en";
};

void validate(const SequentialConfig& cfg);

struct TranscriptEntry {
  int aset = 0;        // session number, from 0
  std::string step;    // S1 S2 S3 S4 feedback confirm complete
  std::string role;    // system user assistant note
  std::string content;
  std::int64_t call_index = -1;  // -1 for entries that are not model calls
};

nlohmann::json to_json(const TranscriptEntry& e);
TranscriptEntry transcript_entry_from_json(const nlohmann::json& j);

struct SequentialResult {
  Assignment assignment;
  std::vector<TranscriptEntry> transcript;
  int sessions = 0;
  int s2_calls = 0;
  int s3_calls = 0;
  int s4_iterations = 0;      // total across sessions
  int max_s4_in_session = 0;
  int feedback_calls = 0;
  int conflicts = 0;          // S2 answers rejected plus conflicts found after S3
  int completed_pairs = 0;    // pairs filled in by the forced completion
  std::vector<std::string> flags;
  // Per call: the messages sent, so session isolation can be checked.
  std::vector<std::vector<clients::Message>> contexts;
};

// id_A in `pool` whose values for every key match record_b. pool order kept.
// An empty match falls back to the whole pool.
std::vector<IdA> filter_candidates(const ProfileRecord& record_b, const std::vector<const ProfileRecord*>& pool,
                                   const std::vector<std::string>& keys);

// id_A value of an S2 JSON answer, if one can be read.
std::optional<IdA> parse_step_answer(std::string_view response);

using TranscriptSink = std::function<void(const TranscriptEntry&)>;

// Backend errors propagate. The sink sees every transcript entry as it is
// made, so a caller can keep the partial transcript; rerunning through a
// replay cache then only issues the calls that never completed.
SequentialResult run_sequential(const ProfileDataset& dataset, clients::ModelBackend& backend,
                                const SequentialConfig& cfg,
                                const protocol::TemplateStore& templates = protocol::TemplateStore::builtin(),
                                const TranscriptSink& sink = {});

}  // namespace ebi::sequential
