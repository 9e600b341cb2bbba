#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ebi/clients/backend.hpp"
#include "ebi/clients/http_backend.hpp"
#include "ebi/clients/replay_cache.hpp"
#include "ebi/core/dataset.hpp"
#include "ebi/core/specs.hpp"
#include "ebi/ensemble/ensemble.hpp"
#include "ebi/eval/metrics.hpp"
#include "ebi/sequential/sequential.hpp"

namespace ebi::cli {

struct DatasetConfig {
  std::filesystem::path a;
  std::filesystem::path b;
  std::optional<std::filesystem::path> truth;
  std::vector<std::string> attribute_keys;
  std::string kind = "generic";  // template family
  std::string language = "en";
  std::optional<double> human;   // H
  std::optional<double> llm;     // G
  std::optional<double> gamma;
};

struct SyntheticModelConfig {
  double accuracy = 0.5;
  std::uint64_t seed = 0;
  double concentration = 0.0;  // 0 = uniform decoys
};

struct ModelConfig {
  std::string type;  // http | synthetic | scripted
  clients::HttpBackendConfig http;
  SyntheticModelConfig synthetic;
  std::filesystem::path script;
};

struct SystemConfig {
  SystemSpec spec;
  std::string dataset;
};

struct SearchConfig {
  std::vector<int> components;
  ensemble::GridOptions grid;
  std::size_t top = 20;  // rows kept in the printed table
};

struct SequentialRunConfig {
  std::string dataset;
  sequential::SequentialConfig config;
};

struct RunConfig {
  std::filesystem::path base_dir;  // directory of the config file
  std::filesystem::path run_dir;
  std::uint64_t seed = 0;
  std::map<std::string, DatasetConfig> datasets;
  std::map<std::string, ModelConfig> models;
  clients::ReplayMode replay_mode = clients::ReplayMode::off;
  std::filesystem::path replay_dir;
  int concurrency = 1;
  std::vector<SystemConfig> systems;
  std::vector<EnsembleSpec> ensembles;
  std::optional<SearchConfig> search;
  std::optional<SequentialRunConfig> sequential;
};

// Relative paths are resolved against the config file's directory. Every
// reference (models, datasets, system ids) is checked here, before any
// backend is built.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

const SystemConfig& find_system(const RunConfig& cfg, int system_id);
ProfileDataset load_dataset(const RunConfig& cfg, const std::string& name);
eval::Baselines baselines(const RunConfig& cfg, const std::string& name, int n);

// Backend for a declared model, wrapped in the replay cache unless the mode
// is off. strict_replay forces strict mode for every model.
clients::BackendPtr make_backend(const RunConfig& cfg, const std::string& model, const Truth* truth,
                                 bool strict_replay);

}  // namespace ebi::cli
