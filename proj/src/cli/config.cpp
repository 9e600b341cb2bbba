#include "ebi/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ebi/clients/scripted_backend.hpp"
#include "ebi/clients/synthetic_judge.hpp"
#include "ebi/core/error.hpp"

namespace ebi::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw UsageError("config " + where + ": " + what);
}

// Unknown keys are almost always typos; reject them.
void allow(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; })) {
      bad(where, "unknown key '" + k + "'");
    }
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) bad(where, std::string("missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(where, std::string("'") + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return get<T>(j, key, where);
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get<T>(j, key, where);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

SamplingParams parse_sampling(const json& j, const std::string& where) {
  allow(j, {"temperature", "seed_policy", "base_seed"}, where);
  SamplingParams s;
  s.temperature = get_opt<double>(j, "temperature", where);
  s.seed_policy = get_or<std::string>(j, "seed_policy", "none", where);
  s.base_seed = get_or<std::int64_t>(j, "base_seed", 0, where);
  if (s.seed_policy != "none" && s.seed_policy != "call_index") bad(where, "seed_policy must be none or call_index");
  return s;
}

PromptProtocol parse_protocol(const json& j, const std::string& where) {
  allow(j, {"type", "calls", "variant", "block_size", "delegate_model"}, where);
  PromptProtocol p;
  p.ptype = get<int>(j, "type", where);
  p.calls = get<int>(j, "calls", where);
  const auto variant = get_or<std::string>(j, "variant", "plain", where);
  if (variant == "plain") {
    p.variant = PromptVariant::plain;
  } else if (variant == "starred") {
    p.variant = PromptVariant::starred;
  } else {
    bad(where, "variant must be plain or starred");
  }
  p.block_size = get_or<int>(j, "block_size", 7, where);
  p.delegate_model = get_opt<std::string>(j, "delegate_model", where);
  return p;
}

ModelConfig parse_model(const json& j, const fs::path& base, std::uint64_t default_seed, const std::string& where) {
  ModelConfig m;
  m.type = get<std::string>(j, "type", where);
  if (m.type == "http") {
    allow(j, {"type", "base_url", "model_name", "api_key_env", "requests_per_minute", "max_retries",
              "initial_backoff_ms", "backoff_factor", "timeout_s"},
          where);
    m.http.base_url = get<std::string>(j, "base_url", where);
    m.http.model_name = get_or<std::string>(j, "model_name", "", where);
    m.http.api_key_env = get_or<std::string>(j, "api_key_env", "", where);
    m.http.requests_per_minute = get_or<double>(j, "requests_per_minute", 0.0, where);
    m.http.max_retries = get_or<int>(j, "max_retries", 5, where);
    m.http.initial_backoff = std::chrono::milliseconds(get_or<long>(j, "initial_backoff_ms", 1000, where));
    m.http.backoff_factor = get_or<double>(j, "backoff_factor", 2.0, where);
    m.http.timeout = std::chrono::seconds(get_or<long>(j, "timeout_s", 120, where));
  } else if (m.type == "synthetic") {
    allow(j, {"type", "accuracy", "seed", "concentration"}, where);
    m.synthetic.accuracy = get<double>(j, "accuracy", where);
    m.synthetic.seed = get_or<std::uint64_t>(j, "seed", default_seed, where);
    m.synthetic.concentration = get_or<double>(j, "concentration", 0.0, where);
    if (!(m.synthetic.accuracy >= 0.0 && m.synthetic.accuracy <= 1.0)) bad(where, "accuracy must lie in [0,1]");
    if (m.synthetic.concentration < 0.0) bad(where, "concentration must be non-negative");
  } else if (m.type == "scripted") {
    allow(j, {"type", "script"}, where);
    m.script = resolve(base, get<std::string>(j, "script", where));
  } else {
    bad(where, "type must be http, synthetic or scripted");
  }
  return m;
}

std::string dataset_of(const json& j, const RunConfig& cfg, const std::string& where) {
  if (j.contains("dataset")) {
    const auto name = get<std::string>(j, "dataset", where);
    if (!cfg.datasets.count(name)) bad(where, "undeclared dataset '" + name + "'");
    return name;
  }
  if (cfg.datasets.size() != 1) bad(where, "'dataset' is required when several datasets are declared");
  return cfg.datasets.begin()->first;
}

void require_model(const RunConfig& cfg, const std::string& name, const std::string& where) {
  if (!cfg.models.count(name)) bad(where, "undeclared model '" + name + "'");
}

}  // namespace

RunConfig parse_config(const json& j, const fs::path& base_dir) {
  allow(j, {"run_dir", "seed", "concurrency", "datasets", "models", "replay", "systems", "ensembles", "search",
            "sequential"},
        "root");
  RunConfig cfg;
  cfg.base_dir = base_dir;
  cfg.run_dir = resolve(base_dir, get_or<std::string>(j, "run_dir", "run", "root"));
  cfg.seed = get_or<std::uint64_t>(j, "seed", 0, "root");
  cfg.concurrency = get_or<int>(j, "concurrency", 1, "root");
  if (cfg.concurrency < 1) bad("root", "concurrency must be at least 1");

  if (!j.contains("datasets") || !j.at("datasets").is_object() || j.at("datasets").empty()) {
    bad("root", "at least one dataset is required");
  }
  for (const auto& [name, d] : j.at("datasets").items()) {
    const std::string where = "datasets." + name;
    allow(d, {"a", "b", "truth", "attribute_keys", "kind", "language", "baselines"}, where);
    DatasetConfig ds;
    ds.a = resolve(base_dir, get<std::string>(d, "a", where));
    ds.b = resolve(base_dir, get<std::string>(d, "b", where));
    if (auto t = get_opt<std::string>(d, "truth", where)) ds.truth = resolve(base_dir, *t);
    ds.attribute_keys = get_or<std::vector<std::string>>(d, "attribute_keys", {}, where);
    ds.kind = get_or<std::string>(d, "kind", "generic", where);
    ds.language = get_or<std::string>(d, "language", "en", where);
    if (d.contains("baselines")) {
      const auto& b = d.at("baselines");
      allow(b, {"human", "llm", "gamma"}, where + ".baselines");
      ds.human = get_opt<double>(b, "human", where);
      ds.llm = get_opt<double>(b, "llm", where);
      ds.gamma = get_opt<double>(b, "gamma", where);
    }
    cfg.datasets.emplace(name, std::move(ds));
  }

  if (j.contains("models")) {
    for (const auto& [name, m] : j.at("models").items()) {
      cfg.models.emplace(name, parse_model(m, base_dir, cfg.seed, "models." + name));
    }
  }

  if (j.contains("replay")) {
    const auto& r = j.at("replay");
    allow(r, {"mode", "dir"}, "replay");
    try {
      cfg.replay_mode = clients::parse_replay_mode(get_or<std::string>(r, "mode", "off", "replay"));
    } catch (const Error& e) {
      bad("replay", e.what());
    }
    cfg.replay_dir = resolve(base_dir, get_or<std::string>(r, "dir", "cache", "replay"));
  }

  std::set<int> ids;
  if (j.contains("systems")) {
    for (std::size_t k = 0; k < j.at("systems").size(); ++k) {
      const auto& s = j.at("systems")[k];
      const std::string where = "systems[" + std::to_string(k) + "]";
      allow(s, {"system_id", "model", "dataset", "c", "s", "sampling"}, where);
      SystemConfig sc;
      sc.spec.system_id = get<int>(s, "system_id", where);
      sc.spec.model = get<std::string>(s, "model", where);
      sc.spec.c_protocol = parse_protocol(get<json>(s, "c", where), where + ".c");
      sc.spec.s_protocol = parse_protocol(get<json>(s, "s", where), where + ".s");
      if (s.contains("sampling")) sc.spec.sampling = parse_sampling(s.at("sampling"), where + ".sampling");
      sc.dataset = dataset_of(s, cfg, where);
      require_model(cfg, sc.spec.model, where);
      for (const auto* p : {&sc.spec.c_protocol, &sc.spec.s_protocol}) {
        if (p->delegate_model) require_model(cfg, *p->delegate_model, where);
      }
      try {
        validate(sc.spec);
      } catch (const ValidationError& e) {
        bad(where, e.what());
      }
      if (!ids.insert(sc.spec.system_id).second) bad(where, "duplicate system_id " + std::to_string(sc.spec.system_id));
      cfg.systems.push_back(std::move(sc));
    }
  }

  auto check_components = [&](const std::vector<int>& comps, const std::string& where) {
    std::optional<std::string> ds;
    for (int id : comps) {
      auto it = std::find_if(cfg.systems.begin(), cfg.systems.end(),
                             [&](const SystemConfig& s) { return s.spec.system_id == id; });
      if (it == cfg.systems.end()) bad(where, "undeclared system " + std::to_string(id));
      if (ds && *ds != it->dataset) bad(where, "components span several datasets");
      ds = it->dataset;
    }
  };

  if (j.contains("ensembles")) {
    std::set<int> ens_ids;
    for (std::size_t k = 0; k < j.at("ensembles").size(); ++k) {
      const auto& e = j.at("ensembles")[k];
      const std::string where = "ensembles[" + std::to_string(k) + "]";
      allow(e, {"ensemble_id", "components", "weights"}, where);
      EnsembleSpec spec;
      spec.ensemble_id = get_opt<int>(e, "ensemble_id", where);
      spec.components = get<std::vector<int>>(e, "components", where);
      spec.weights = get_or<std::vector<double>>(e, "weights", std::vector<double>(spec.components.size(), 1.0), where);
      try {
        validate(spec);
      } catch (const ValidationError& ex) {
        bad(where, ex.what());
      }
      check_components(spec.components, where);
      if (spec.ensemble_id && !ens_ids.insert(*spec.ensemble_id).second) bad(where, "duplicate ensemble_id");
      cfg.ensembles.push_back(std::move(spec));
    }
  }

  if (j.contains("search")) {
    const auto& s = j.at("search");
    allow(s, {"components", "values", "cap", "include_subsets", "top"}, "search");
    SearchConfig sc;
    sc.components = get<std::vector<int>>(s, "components", "search");
    sc.grid.values = get_or<std::vector<double>>(s, "values", sc.grid.values, "search");
    sc.grid.cap = get_or<std::size_t>(s, "cap", sc.grid.cap, "search");
    sc.grid.include_subsets = get_or<bool>(s, "include_subsets", false, "search");
    sc.top = get_or<std::size_t>(s, "top", sc.top, "search");
    if (sc.components.empty()) bad("search", "components must not be empty");
    if (std::any_of(sc.grid.values.begin(), sc.grid.values.end(), [](double v) { return !(v > 0.0); })) {
      bad("search", "weight values must be positive");
    }
    check_components(sc.components, "search");
    cfg.search = std::move(sc);
  }

  if (j.contains("sequential")) {
    const auto& s = j.at("sequential");
    allow(s, {"dataset", "model", "recursion_threshold", "max_conflict_iterations", "attribute_keys",
              "feedback_retries", "sampling"},
          "sequential");
    SequentialRunConfig sr;
    sr.dataset = dataset_of(s, cfg, "sequential");
    auto& c = sr.config;
    c.model = get<std::string>(s, "model", "sequential");
    require_model(cfg, c.model, "sequential");
    c.recursion_threshold = get_or<int>(s, "recursion_threshold", 2, "sequential");
    c.max_conflict_iterations = get_or<int>(s, "max_conflict_iterations", 10, "sequential");
    c.attribute_keys = get_or<std::vector<std::string>>(s, "attribute_keys", cfg.datasets.at(sr.dataset).attribute_keys,
                                                        "sequential");
    c.feedback_retries = get_or<int>(s, "feedback_retries", 0, "sequential");
    if (s.contains("sampling")) c.sampling = parse_sampling(s.at("sampling"), "sequential.sampling");
    c.kind = cfg.datasets.at(sr.dataset).kind;
    c.language = cfg.datasets.at(sr.dataset).language;
    try {
      sequential::validate(c);
    } catch (const ValidationError& e) {
      bad("sequential", e.what());
    }
    cfg.sequential = std::move(sr);
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw UsageError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, fs::absolute(path).parent_path());
}

const SystemConfig& find_system(const RunConfig& cfg, int system_id) {
  for (const auto& s : cfg.systems) {
    if (s.spec.system_id == system_id) return s;
  }
  std::string known;
  for (const auto& s : cfg.systems) known += (known.empty() ? "" : ",") + std::to_string(s.spec.system_id);
  throw UsageError("unknown system " + std::to_string(system_id) + " (known: " + (known.empty() ? "none" : known) + ")");
}

ProfileDataset load_dataset(const RunConfig& cfg, const std::string& name) {
  const auto& d = cfg.datasets.at(name);
  return ebi::load_dataset(d.a, d.b, d.truth, d.attribute_keys, name);
}

eval::Baselines baselines(const RunConfig& cfg, const std::string& name, int n) {
  const auto& d = cfg.datasets.at(name);
  eval::Baselines b{d.human, d.llm, d.gamma, n};
  eval::validate(b);
  return b;
}

clients::BackendPtr make_backend(const RunConfig& cfg, const std::string& model, const Truth* truth,
                                 bool strict_replay) {
  const auto it = cfg.models.find(model);
  if (it == cfg.models.end()) throw UsageError("undeclared model '" + model + "'");
  const auto& m = it->second;
  clients::BackendPtr inner;
  if (m.type == "http") {
    inner = std::make_shared<clients::HttpChatBackend>(m.http);
  } else if (m.type == "synthetic") {
    if (!truth) throw ValidationError("synthetic model '" + model + "' needs a dataset with truth");
    clients::SyntheticJudgeConfig jc;
    jc.truth = *truth;
    jc.accuracy = m.synthetic.accuracy;
    jc.seed = m.synthetic.seed;
    if (m.synthetic.concentration > 0.0) {
      jc.confusion = clients::random_confusion(*truth, m.synthetic.concentration, m.synthetic.seed);
    }
    inner = std::make_shared<clients::SyntheticJudgeBackend>(std::move(jc));
  } else {
    inner = clients::ScriptedBackend::from_file(m.script);
  }
  const auto mode = strict_replay ? clients::ReplayMode::strict : cfg.replay_mode;
  if (mode == clients::ReplayMode::off) return inner;
  return std::make_shared<clients::CachingBackend>(inner, std::make_shared<clients::ReplayCache>(cfg.replay_dir), mode);
}

}  // namespace ebi::cli
