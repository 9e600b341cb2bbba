#include "ebi/cli/commands.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "ebi/cli/synth.hpp"
#include "ebi/core/error.hpp"
#include "ebi/core/hashing.hpp"
#include "ebi/core/matrix_io.hpp"
#include "ebi/core/run_store.hpp"
#include "ebi/eval/report.hpp"
#include "ebi/inference/assignment.hpp"
#include "ebi/inference/confidence.hpp"
#include "ebi/protocol/collect.hpp"

namespace ebi::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string matrix_path(int system_id, const std::string& which) {
  return "matrices/system_" + std::to_string(system_id) + "_" + which + ".csv";
}

std::string system_report_path(int system_id) { return "reports/system_" + std::to_string(system_id) + ".json"; }

std::string ensemble_label(const EnsembleSpec& spec, std::size_t index) {
  return spec.ensemble_id ? std::to_string(*spec.ensemble_id) : "e" + std::to_string(index + 1);
}

namespace {

std::string ensemble_report_path(const std::string& label) { return "reports/ensemble_" + label + ".json"; }

std::string sha_of(const RunStore& store, const std::string& rel) {
  for (const auto& e : store.manifest()) {
    if (e.path == rel) return e.sha256;
  }
  return {};
}

// Rethrows a library error with a prefix, keeping its exit-code class.
template <class F>
auto with_context(const std::string& ctx, F&& f) {
  try {
    return f();
  } catch (const UsageError& e) {
    throw UsageError(ctx + ": " + e.what());
  } catch (const CacheMissError& e) {
    throw CacheMissError(ctx + ": " + e.what());
  } catch (const BackendError& e) {
    throw BackendError(ctx + ": " + e.what());
  } catch (const HashMismatchError& e) {
    throw HashMismatchError(ctx + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(ctx + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ctx + ": " + e.what());
  }
}

class Datasets {
 public:
  explicit Datasets(const RunConfig& cfg) : cfg_(cfg) {}
  const ProfileDataset& get(const std::string& name) {
    auto it = cache_.find(name);
    if (it == cache_.end()) {
      it = cache_.emplace(name, with_context("dataset " + name, [&] { return load_dataset(cfg_, name); })).first;
    }
    return it->second;
  }

 private:
  const RunConfig& cfg_;
  std::map<std::string, ProfileDataset> cache_;
};

// One backend per model name so limiters and caches are shared.
class Backends {
 public:
  Backends(const RunConfig& cfg, bool strict) : cfg_(cfg), strict_(strict) {}
  clients::BackendPtr get(const std::string& model, const ProfileDataset& d) {
    const auto key = model + "\x1f" + d.name;
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      const Truth* truth = d.truth ? &*d.truth : nullptr;
      it = cache_.emplace(key, make_backend(cfg_, model, truth, strict_)).first;
    }
    return it->second;
  }

 private:
  const RunConfig& cfg_;
  bool strict_;
  std::map<std::string, clients::BackendPtr> cache_;
};

std::vector<int> selected(const RunConfig& cfg, const std::vector<int>& ids) {
  std::vector<int> out;
  if (ids.empty()) {
    for (const auto& s : cfg.systems) out.push_back(s.spec.system_id);
  } else {
    for (int id : ids) out.push_back(find_system(cfg, id).spec.system_id);
  }
  if (out.empty()) throw UsageError("config declares no systems");
  return out;
}

const Truth& truth_of(const ProfileDataset& d) {
  if (!d.truth) throw ValidationError("dataset " + d.name + " has no truth file; scoring needs one");
  return *d.truth;
}

JudgmentMatrix load_judgment(const RunStore& store, int id) {
  if (store.exists(matrix_path(id, "J"))) return store.load_matrix<JudgmentMatrix>(matrix_path(id, "J"));
  throw ValidationError("system " + std::to_string(id) + " has no judgment matrix; run collect and judge first");
}

json component_sources(const RunStore& store, const std::vector<int>& components) {
  json src = json::object();
  for (int id : components) src[matrix_path(id, "J")] = sha_of(store, matrix_path(id, "J"));
  return src;
}

std::vector<eval::SystemRow> system_rows(const RunConfig& cfg, const RunStore& store) {
  std::vector<eval::SystemRow> rows;
  for (const auto& s : cfg.systems) {
    const auto rel = system_report_path(s.spec.system_id);
    if (!store.exists(rel)) continue;
    const auto j = store.read_json(rel);
    if (!j.contains("metrics")) continue;
    rows.push_back({s.spec.system_id, s.spec.model, s.spec.c_protocol.label(), s.spec.s_protocol.label(),
                    eval::report_from_json(j.at("metrics"))});
  }
  return rows;
}

std::vector<eval::EnsembleRow> ensemble_rows(const RunConfig& cfg, const RunStore& store) {
  std::vector<eval::EnsembleRow> rows;
  for (std::size_t k = 0; k < cfg.ensembles.size(); ++k) {
    const auto label = ensemble_label(cfg.ensembles[k], k);
    if (!store.exists(ensemble_report_path(label))) continue;
    const auto j = store.read_json(ensemble_report_path(label));
    rows.push_back({label, cfg.ensembles[k].components, cfg.ensembles[k].weights,
                    eval::report_from_json(j.at("report"))});
  }
  return rows;
}

// The files a report row was computed from must still carry the recorded hashes.
bool sources_current(const RunStore& store, const json& row) {
  if (!row.contains("sources")) return false;
  for (const auto& [path, hash] : row.at("sources").items()) {
    if (sha_of(store, path) != hash.get<std::string>()) return false;
  }
  return true;
}

}  // namespace

std::vector<CollectSummary> cmd_collect(const RunConfig& cfg, const std::vector<int>& system_ids, bool strict_replay,
                                        std::ostream& out) {
  const auto ids = selected(cfg, system_ids);
  RunStore store(cfg.run_dir);
  Datasets datasets(cfg);
  Backends backends(cfg, strict_replay);
  std::vector<CollectSummary> summaries;
  for (int id : ids) {
    const auto& sc = find_system(cfg, id);
    const auto& d = datasets.get(sc.dataset);
    const auto& dc = cfg.datasets.at(sc.dataset);
    const auto r = with_context("system " + std::to_string(id), [&] {
      auto c_backend = backends.get(sc.spec.model, d);
      auto s_backend = backends.get(sc.spec.s_protocol.delegate_model.value_or(sc.spec.model), d);
      protocol::CollectOptions opt;
      opt.kind = dc.kind;
      opt.language = dc.language;
      opt.concurrency = cfg.concurrency;
      opt.store = &store;
      return protocol::collect_system(sc.spec, d, c_backend, s_backend, opt);
    });
    store.save_matrix(matrix_path(id, "c"), r.c, "subjective");
    store.save_matrix(matrix_path(id, "s"), r.s, "weight");
    CollectSummary s{id, r.issued, r.resumed, r.c_parse_failures, r.s_parse_failures};
    store.set_meta("collect.system_" + std::to_string(id),
                   {{"issued", s.issued}, {"resumed", s.resumed}, {"c_parse_failures", s.c_parse_failures},
                    {"s_parse_failures", s.s_parse_failures}});
    out << "system " << id << ": " << (s.issued + s.resumed) << " calls (" << s.issued << " issued, " << s.resumed
        << " resumed), parse failures c=" << s.c_parse_failures << " s=" << s.s_parse_failures << "\n";
    summaries.push_back(s);
  }
  return summaries;
}

void cmd_judge(const RunConfig& cfg, const std::vector<int>& system_ids, bool oracle, std::ostream& out) {
  const auto ids = selected(cfg, system_ids);
  RunStore store(cfg.run_dir);
  Datasets datasets(cfg);
  for (int id : ids) {
    const auto& sc = find_system(cfg, id);
    if (!store.exists(matrix_path(id, "c")) || !store.exists(matrix_path(id, "s"))) {
      throw ValidationError("system " + std::to_string(id) + " has no matrices in " + cfg.run_dir.string() +
                            "; run collect first");
    }
    const auto& d = datasets.get(sc.dataset);
    auto c = store.load_matrix<SubjectiveDegreeMatrix>(matrix_path(id, "c"));
    c.call_count = sc.spec.c_protocol.calls;
    const auto s = store.load_matrix<WeightMatrix>(matrix_path(id, "s"));
    const auto conf = inference::confidence_matrix(c);
    const auto j = inference::judgment_matrix(s, conf);
    store.save_matrix(matrix_path(id, "conf"), conf, "confidence");
    store.save_matrix(matrix_path(id, "J"), j, "judgment");
    const auto assignment = inference::greedy_assign(j);
    const auto apath = "assignments/system_" + std::to_string(id) + ".json";
    store.write_json(apath, to_json(assignment), "assignment");

    json row{{"system_id", id},
             {"model", sc.spec.model},
             {"dataset", sc.dataset},
             {"c_ji", sc.spec.c_protocol.label()},
             {"s_ij", sc.spec.s_protocol.label()},
             {"greedy_total", inference::assignment_total(j, assignment)}};
    row["sources"] = {{matrix_path(id, "c"), sha_of(store, matrix_path(id, "c"))},
                      {matrix_path(id, "s"), sha_of(store, matrix_path(id, "s"))},
                      {matrix_path(id, "J"), sha_of(store, matrix_path(id, "J"))},
                      {apath, sha_of(store, apath)}};
    if (d.truth) {
      const int n_c = eval::score(assignment, *d.truth);
      row["metrics"] = eval::to_json(eval::evaluate(n_c, baselines(cfg, sc.dataset, static_cast<int>(d.size()))));
    }
    if (oracle) {
      const auto best = inference::optimal_assign(j);
      row["optimal_total"] = inference::assignment_total(j, best);
      if (d.truth) row["optimal_n_c"] = eval::score(best, *d.truth);
      out << "system " << id << ": greedy total " << format_double(row["greedy_total"].get<double>())
          << ", optimal total " << format_double(row["optimal_total"].get<double>());
      if (d.truth) out << ", optimal n_c " << row["optimal_n_c"].get<int>();
      out << "\n";
    }
    store.write_json(system_report_path(id), row, "report");
  }

  const auto rows = system_rows(cfg, store);
  store.write_text("reports/systems.csv", eval::system_table_csv(rows), "report");
  store.write_json("reports/systems.json", eval::system_table_json(rows), "report");
  const auto text = eval::system_table_text(rows);
  store.write_text("reports/systems.txt", text, "report");
  out << text;
}

void cmd_ensemble(const RunConfig& cfg, const std::vector<int>& ensemble_ids, bool search, std::ostream& out) {
  if (!search && cfg.ensembles.empty()) throw UsageError("config declares no ensembles");
  if (search && !cfg.search) throw UsageError("config has no search section");
  RunStore store(cfg.run_dir);
  Datasets datasets(cfg);
  ensemble::JudgmentStore js;
  auto need = [&](const std::vector<int>& comps) {
    for (int id : comps) {
      if (!js.count(id)) js.emplace(id, load_judgment(store, id));
    }
  };
  auto dataset_of = [&](const std::vector<int>& comps) -> const std::string& {
    return find_system(cfg, comps.front()).dataset;
  };

  std::vector<std::size_t> chosen;
  if (ensemble_ids.empty()) {
    if (!search) {
      chosen.resize(cfg.ensembles.size());
      std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    }
  } else {
    for (int id : ensemble_ids) {
      auto it = std::find_if(cfg.ensembles.begin(), cfg.ensembles.end(),
                             [&](const EnsembleSpec& e) { return e.ensemble_id == id; });
      if (it == cfg.ensembles.end()) throw UsageError("unknown ensemble " + std::to_string(id));
      chosen.push_back(static_cast<std::size_t>(it - cfg.ensembles.begin()));
    }
  }

  for (auto k : chosen) {
    const auto& spec = cfg.ensembles[k];
    const auto label = ensemble_label(spec, k);
    need(spec.components);
    const auto& name = dataset_of(spec.components);
    const auto& d = datasets.get(name);
    const auto res = ensemble::evaluate_ensemble(spec, js, truth_of(d), baselines(cfg, name, static_cast<int>(d.size())));
    const auto jpath = "matrices/ensemble_" + label + "_J.csv";
    const auto apath = "assignments/ensemble_" + label + ".json";
    store.save_matrix(jpath, res.combined, "judgment");
    store.write_json(apath, to_json(res.assignment), "assignment");
    auto row = ensemble::to_json(res);
    row["label"] = label;
    row["dataset"] = name;
    row["sources"] = component_sources(store, spec.components);
    row["sources"][jpath] = sha_of(store, jpath);
    store.write_json(ensemble_report_path(label), row, "report");
  }

  if (!chosen.empty()) {
    const auto rows = ensemble_rows(cfg, store);
    store.write_text("reports/ensembles.csv", eval::ensemble_table_csv(rows), "report");
    store.write_json("reports/ensembles.json", eval::ensemble_table_json(rows), "report");
    const auto text = eval::ensemble_table_text(rows);
    store.write_text("reports/ensembles.txt", text, "report");
    out << text;
  }

  if (search) {
    const auto& sc = *cfg.search;
    need(sc.components);
    const auto& name = dataset_of(sc.components);
    const auto& d = datasets.get(name);
    const auto candidates = ensemble::weight_grid(sc.components, sc.grid);
    const auto results =
        ensemble::search_weights(candidates, js, truth_of(d), baselines(cfg, name, static_cast<int>(d.size())));
    std::vector<eval::EnsembleRow> rows;
    for (std::size_t k = 0; k < results.size(); ++k) {
      rows.push_back({"grid-" + std::to_string(k + 1), results[k].spec.components, results[k].spec.weights,
                      results[k].report});
    }
    store.write_text("reports/search.csv", eval::ensemble_table_csv(rows), "report");
    std::vector<eval::EnsembleRow> top(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(std::min(sc.top, rows.size())));
    auto top_json = eval::ensemble_table_json(top);
    top_json["evaluated"] = rows.size();
    top_json["sources"] = component_sources(store, sc.components);
    store.write_json("reports/search.json", top_json, "report");
    out << "weight search: " << rows.size() << " candidates, top " << top.size() << "\n"
        << eval::ensemble_table_text(top);
  }
}

json cmd_sequential(const RunConfig& cfg, bool strict_replay, std::ostream& out) {
  if (!cfg.sequential) throw UsageError("config has no sequential section");
  const auto& sr = *cfg.sequential;
  RunStore store(cfg.run_dir);
  Datasets datasets(cfg);
  const auto& d = datasets.get(sr.dataset);
  Backends backends(cfg, strict_replay);
  auto backend = backends.get(sr.config.model, d);

  std::string partial;
  sequential::SequentialResult res;
  try {
    res = with_context("sequential", [&] {
      return sequential::run_sequential(d, *backend, sr.config, protocol::TemplateStore::builtin(),
                                        [&](const sequential::TranscriptEntry& e) { partial += to_json(e).dump() + "\n"; });
    });
  } catch (...) {
    store.write_text("sequential/transcript.partial.jsonl", partial, "transcript");
    throw;
  }

  store.write_text("sequential/transcript.jsonl", partial, "transcript");
  store.write_json("sequential/assignment.json", to_json(res.assignment), "assignment");
  json report{{"dataset", sr.dataset},
              {"model", sr.config.model},
              {"sessions", res.sessions},
              {"s2_calls", res.s2_calls},
              {"s3_calls", res.s3_calls},
              {"s4_iterations", res.s4_iterations},
              {"max_s4_in_session", res.max_s4_in_session},
              {"feedback_calls", res.feedback_calls},
              {"conflicts", res.conflicts},
              {"completed_pairs", res.completed_pairs},
              {"flags", res.flags}};
  report["sources"] = {{"sequential/transcript.jsonl", sha_of(store, "sequential/transcript.jsonl")},
                       {"sequential/assignment.json", sha_of(store, "sequential/assignment.json")}};
  out << "sequential: " << res.sessions << " Asets, S2 " << res.s2_calls << ", S3 " << res.s3_calls << ", S4 "
      << res.s4_iterations << " (max " << res.max_s4_in_session << " in one Aset)";
  if (d.truth) {
    const int n_c = eval::score(res.assignment, *d.truth);
    report["n_c"] = n_c;
    out << ", n_c " << n_c << "/" << d.size();
    const auto& dc = cfg.datasets.at(sr.dataset);
    if (dc.human || (dc.llm && dc.gamma)) {
      report["metrics"] = eval::to_json(eval::evaluate(n_c, baselines(cfg, sr.dataset, static_cast<int>(d.size()))));
    }
  }
  out << "\n";
  for (const auto& f : res.flags) out << "flag: " << f << "\n";
  store.write_json("sequential/report.json", report, "report");
  return report;
}

json cmd_report(const RunConfig& cfg, std::ostream& out) {
  RunStore store(cfg.run_dir);  // re-verifies every hash
  json summary;
  std::string text;
  std::vector<std::string> stale;

  for (const auto& s : cfg.systems) {
    const auto rel = system_report_path(s.spec.system_id);
    if (store.exists(rel) && !sources_current(store, store.read_json(rel))) stale.push_back(rel);
  }
  for (std::size_t k = 0; k < cfg.ensembles.size(); ++k) {
    const auto rel = ensemble_report_path(ensemble_label(cfg.ensembles[k], k));
    if (store.exists(rel) && !sources_current(store, store.read_json(rel))) stale.push_back(rel);
  }

  const auto systems = system_rows(cfg, store);
  summary["systems"] = eval::system_table_json(systems);
  text += "Single systems\n" + eval::system_table_text(systems);
  const auto ensembles = ensemble_rows(cfg, store);
  summary["ensembles"] = eval::ensemble_table_json(ensembles);
  text += "\nEnsembles\n" + eval::ensemble_table_text(ensembles);
  if (store.exists("reports/search.json")) {
    summary["search"] = store.read_json("reports/search.json");
    text += "\nWeight search: " + std::to_string(summary["search"].value("evaluated", 0)) + " candidates evaluated\n";
  }
  if (store.exists("sequential/report.json")) {
    const auto seq = store.read_json("sequential/report.json");
    if (!sources_current(store, seq)) stale.push_back("sequential/report.json");
    summary["sequential"] = seq;
    text += "\nSequential baseline\n";
    if (seq.contains("metrics")) {
      text += "n_c, Lift, Reach: " + eval::metric_cells(eval::report_from_json(seq.at("metrics")));
    } else if (seq.contains("n_c")) {
      text += "n_c " + std::to_string(seq.at("n_c").get<int>());
    }
    text += "\nS4 iterations " + std::to_string(seq.at("s4_iterations").get<int>()) + "\n";
  }
  summary["stale"] = stale;
  for (const auto& s : stale) text += "stale: " + s + " was computed from files that have since changed\n";
  text += std::string("\n") + eval::kAccuracyNote + "\n";

  store.write_text("reports/summary.txt", text, "report");
  store.write_json("reports/summary.json", summary, "report");
  out << text;
  return summary;
}

json cmd_synth(const SynthOptions& o, std::ostream& out) {
  if (o.out_dir.empty()) throw UsageError("synth needs an output directory");
  if (o.judges.empty()) throw UsageError("synth needs at least one judge");
  if (o.calls < 1) throw UsageError("calls must be at least 1");
  if (o.concentration < 0.0) throw UsageError("concentration must be non-negative");
  for (double p : o.judges) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("judge accuracy must lie in [0,1]");
  }
  const auto groups = o.groups.empty() ? default_groups(o.n) : o.groups;
  if (std::accumulate(groups.begin(), groups.end(), 0) != o.n) throw UsageError("group sizes must add up to n");
  const auto d = synthetic_dataset(groups, o.seed);

  fs::create_directories(o.out_dir);
  write_file_atomic(o.out_dir / "a.csv", side_to_csv(d.side_a, "id_A", d.attribute_keys));
  write_file_atomic(o.out_dir / "b.csv", side_to_csv(d.side_b, "id_B", d.attribute_keys));
  write_file_atomic(o.out_dir / "truth.csv", truth_to_csv(*d.truth));

  // No human reference exists for synthetic data: H = G = N, so Reach reads as Acc.
  json cfg{{"run_dir", "run"},
           {"seed", o.seed},
           {"datasets",
            {{"synthetic",
              {{"a", "a.csv"},
               {"b", "b.csv"},
               {"truth", "truth.csv"},
               {"attribute_keys", d.attribute_keys},
               {"baselines", {{"human", o.n}, {"llm", o.n}}}}}}}};
  json models = json::object();
  json systems = json::array();
  std::vector<int> components;
  for (std::size_t k = 0; k < o.judges.size(); ++k) {
    const auto name = "judge_" + std::to_string(k + 1);
    models[name] = {{"type", "synthetic"},
                    {"accuracy", o.judges[k]},
                    {"seed", judge_seed(o.seed, k)},
                    {"concentration", o.concentration}};
    const int id = static_cast<int>(k) + 1;
    json proto{{"type", 1}, {"calls", o.calls}};
    systems.push_back({{"system_id", id}, {"model", name}, {"c", proto}, {"s", proto}});
    components.push_back(id);
  }
  cfg["models"] = models;
  cfg["systems"] = systems;
  cfg["ensembles"] = json::array({{{"ensemble_id", 100}, {"components", components},
                                   {"weights", std::vector<double>(components.size(), 1.0)}}});
  cfg["sequential"] = {{"model", "judge_1"}};
  write_file_atomic(o.out_dir / "config.json", cfg.dump(2) + "\n");
  out << "wrote " << (o.out_dir / "config.json").string() << " (n=" << o.n << ", " << o.judges.size() << " judges)\n";

  json result{{"config", (o.out_dir / "config.json").string()}, {"n", o.n}, {"groups", groups}};
  if (o.run) {
    const auto rc = load_config(o.out_dir / "config.json");
    cmd_collect(rc, {}, false, out);
    cmd_judge(rc, {}, false, out);
    cmd_ensemble(rc, {}, false, out);
    result["summary"] = cmd_report(rc, out);
  }
  return result;
}

}  // namespace ebi::cli
