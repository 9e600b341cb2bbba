#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ebi/cli/config.hpp"

namespace ebi::cli {

// Run-directory layout shared by every command.
std::string matrix_path(int system_id, const std::string& which);  // which: c s conf J
std::string system_report_path(int system_id);
std::string ensemble_label(const EnsembleSpec& spec, std::size_t index);

struct CollectSummary {
  int system_id = 0;
  long issued = 0;
  long resumed = 0;
  int c_parse_failures = 0;
  int s_parse_failures = 0;
};

// Empty system_ids = every declared system.
std::vector<CollectSummary> cmd_collect(const RunConfig& cfg, const std::vector<int>& system_ids, bool strict_replay,
                                        std::ostream& out);
// Per system: confidence, judgment, greedy assignment, metrics; then the
// single-system table over every judged system in the run.
void cmd_judge(const RunConfig& cfg, const std::vector<int>& system_ids, bool oracle, std::ostream& out);
// Declared ensembles (all when ensemble_ids is empty) and, when asked, the
// configured weight search.
void cmd_ensemble(const RunConfig& cfg, const std::vector<int>& ensemble_ids, bool search, std::ostream& out);
nlohmann::json cmd_sequential(const RunConfig& cfg, bool strict_replay, std::ostream& out);
// Re-verifies the manifest and writes reports/summary.{txt,json}.
nlohmann::json cmd_report(const RunConfig& cfg, std::ostream& out);

struct SynthOptions {
  std::filesystem::path out_dir;
  int n = 20;
  std::vector<int> groups;  // empty = blocks of at most 7
  std::vector<double> judges{0.45, 0.45, 0.45, 0.45, 0.45};
  int calls = 50;
  double concentration = 0.2;
  std::uint64_t seed = 0;
  bool run = false;  // also collect, judge and ensemble
};

// Writes a.csv, b.csv, truth.csv and config.json under out_dir. With run set,
// the pipeline is executed in out_dir/run.
nlohmann::json cmd_synth(const SynthOptions& options, std::ostream& out);

// Full command line: verb plus flags. Returns the process exit code
// (0 success, 1 domain error, 2 usage error).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ebi::cli
