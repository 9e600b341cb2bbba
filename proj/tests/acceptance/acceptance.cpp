// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ebi/cli/commands.hpp"
#include "ebi/cli/config.hpp"
#include "ebi/cli/synth.hpp"
#include "ebi/clients/scripted_backend.hpp"
#include "ebi/clients/synthetic_judge.hpp"
#include "ebi/core/error.hpp"
#include "ebi/core/hashing.hpp"
#include "ebi/ensemble/ensemble.hpp"
#include "ebi/eval/metrics.hpp"
#include "ebi/inference/assignment.hpp"
#include "ebi/inference/confidence.hpp"
#include "ebi/protocol/parsers.hpp"
#include "ebi/sequential/sequential.hpp"
#include "ebi/sequential/tagged.hpp"
#include "support/builders.hpp"
#include "support/synthetic.hpp"

using namespace ebi;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = EBI_FIXTURE_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

bool near(double x, double want, double tol) { return std::abs(x - want) <= tol; }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool is_bijection(const Assignment& a, const IdAxes& axes) {
  try {
    validate(a, axes);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

Outcome metric_vectors() {
  Outcome o;
  struct Row {
    double n_c, h, g, lift, reach;
  };
  const std::vector<Row> rows{{23, 19, 22, 21.1, 104.5},
                              {26, 19, 22, 36.8, 118.2},
                              {21, 13, 20, 61.5, 105.0},
                              {27, 21.2, 28, 27.4, 96.4},
                              {31, 17.4, 23, 78.2, 134.8}};
  for (const auto& r : rows) {
    const double l = eval::lift(r.n_c, r.h), m = eval::reach(r.n_c, r.g);
    if (!near(l, r.lift, 0.1) || !near(m, r.reach, 0.1))
      o.fail(fmt("n_c=%g gave Lift %.2f", r.n_c, l) + fmt(", Reach %.2f", m));
  }
  const std::vector<double> h{19, 13}, g{22, 20};
  const double gm = eval::gamma(h, g);
  if (!near(gm, 0.757, 0.0005)) o.fail(fmt("gamma %.5f", gm));
  for (auto [llm, want] : {std::pair{28.0, 21.2}, std::pair{23.0, 17.4}}) {
    const double he = eval::effective_baseline(llm, gm);
    if (!near(he, want, 0.05)) o.fail(fmt("H_eff(%g) = %.3f", llm, he));
  }
  // the effective-H path through evaluate, as used for the last two rows
  eval::Baselines b;
  b.llm = 28;
  b.gamma = 0.757;
  b.n = 50;
  const auto rep = eval::evaluate(27, b);
  if (!near(rep.lift, 27.4, 0.1) || !near(rep.reach, 96.4, 0.1))
    o.fail(fmt("evaluate(27) with H_eff gave %.2f / %.2f", rep.lift, rep.reach));
  if (o.pass) o.detail = fmt("5 vectors, gamma %.4f", gm);
  return o;
}

Outcome bayes_equivalence() {
  Outcome o;
  std::mt19937_64 rng(3141);
  std::uniform_int_distribution<int> size(2, 6);
  std::bernoulli_distribution sparse(0.15);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(size(rng));
    auto g = oracle::random_grid(rng, n, 0.0, 5.0);
    for (auto& row : g)
      for (auto& x : row)
        if (sparse(rng)) x = 0.0;
    const auto conf = inference::confidence_matrix(testing_util::subjective(g));
    const auto bf = oracle::brute_force_confidence(g);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        worst = std::max(worst, std::abs(conf.entries(i, j) - bf[i][j]));
        sum += conf.entries(i, j);
      }
      if (!near(sum, 1.0, 1e-9)) o.fail(fmt("row sum %.12f", sum));
    }
    const auto reg = inference::regularize(testing_util::subjective(g), {});
    for (double lambda : {0.5, 2.0, 10.0}) {
      auto scaled = reg;
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) scaled.entries(r, c) *= lambda;
      const auto cs = inference::confidence_matrix(scaled);
      for (std::size_t k = 0; k < n * n; ++k)
        if (!near(cs.entries.data()[k], conf.entries.data()[k], 1e-9)) o.fail(fmt("not scale invariant at %g", lambda));
    }
  }
  if (worst > 1e-12) o.fail(fmt("max deviation %.3e", worst));
  if (o.pass) o.detail = fmt("1000 matrices, max deviation %.1e", worst);
  return o;
}

Outcome assignment_properties() {
  Outcome o;
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> lam(0.1, 20.0), mu(-10.0, 10.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto g = oracle::random_grid(rng, 5);
    const auto j = testing_util::ba<JudgmentMatrix>(g);
    const auto a = inference::greedy_assign(j);
    if (!is_bijection(a, j.axes)) o.fail("not a bijection");
    for (std::size_t k = 1; k < a.trace.size(); ++k)
      if (a.trace[k].value > a.trace[k - 1].value) o.fail("trace increases");
    const double best = oracle::exhaustive_best_total(g);
    if (inference::assignment_total(j, a) > best + 1e-12) o.fail("greedy beats the optimum");
    const double l = lam(rng), m = mu(rng);
    auto h = g;
    for (auto& row : h)
      for (auto& x : row) x = l * x + m;
    if (inference::greedy_assign(testing_util::ba<JudgmentMatrix>(h)).pairs != a.pairs) o.fail("affine map changed the pairing");
  }
  if (o.pass) o.detail = "500 matrices";
  return o;
}

// Acc (percent) of each of the judges alone, and of their equal-weight ensemble
// with and without the extra weak judge.
struct Draw {
  std::vector<double> single;
  double ensemble = 0.0;
  double ensemble_spoiled = 0.0;
};

Draw ensemble_draw(std::uint64_t seed) {
  const auto d = cli::synthetic_dataset(cli::default_groups(20), seed);
  const double n = static_cast<double>(d.size());
  const std::vector<double> accuracy{0.45, 0.45, 0.45, 0.45, 0.45, 0.30};
  std::vector<JudgmentMatrix> js;
  Draw out;
  for (std::size_t k = 0; k < accuracy.size(); ++k) {
    js.push_back(testing_util::synthetic_judgment(d, accuracy[k], 50, cli::judge_seed(seed, k), 0.2));
    if (k < 5) out.single.push_back(100.0 * eval::score(inference::greedy_assign(js.back()), *d.truth) / n);
  }
  const std::vector<JudgmentMatrix> five(js.begin(), js.begin() + 5);
  out.ensemble = 100.0 * eval::score(inference::greedy_assign(ensemble::combine(five, std::vector<double>(5, 1.0))), *d.truth) / n;
  out.ensemble_spoiled =
      100.0 * eval::score(inference::greedy_assign(ensemble::combine(js, std::vector<double>(6, 1.0))), *d.truth) / n;
  return out;
}

Outcome weak_learners() {
  Outcome o;
  double single = 0.0, ens = 0.0, spoiled = 0.0;
  constexpr int kSeeds = 100;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto d = ensemble_draw(static_cast<std::uint64_t>(s));
    for (double x : d.single) single += x / d.single.size();
    ens += d.ensemble;
    spoiled += d.ensemble_spoiled;
  }
  single /= kSeeds;
  ens /= kSeeds;
  spoiled /= kSeeds;
  const double gain = ens - single, drop = ens - spoiled;
  if (gain < 5.0) o.fail(fmt("gain %.2f pt", gain));
  if (drop > 2.0) o.fail(fmt("drop %.2f pt", drop));
  o.detail = fmt("single %.2f%%, ensemble %.2f%%, with weak judge %.2f%%", single, ens, spoiled) +
             fmt(" (gain %.2f pt, drop %.2f pt)", gain, drop);
  return o;
}

Outcome parser_corpus() {
  Outcome o;
  auto blocks = [](const json& c) {
    protocol::BlockIds ids;
    for (auto a : c.at("block_a")) ids.a.push_back(IdA{a.get<std::int64_t>()});
    for (auto b : c.at("block_b")) ids.b.push_back(IdB{b.get<std::int64_t>()});
    return ids;
  };
  auto load = [](const char* name) { return json::parse(read_file(kFixtures / "parsers" / name)); };
  std::map<std::string, int> ok;
  auto run = [&](const char* name, const std::function<bool(const json&)>& check) {
    const auto corpus = load(name);
    if (corpus.size() < 30) o.fail(std::string(name) + " has fewer than 30 cases");
    for (const auto& c : corpus) {
      try {
        if (check(c))
          ++ok[name];
        else
          o.fail(std::string(name) + ": " + c.at("name").get<std::string>());
      } catch (const std::exception& e) {
        o.fail(std::string(name) + ": " + c.at("name").get<std::string>() + " threw " + e.what());
      }
    }
  };
  run("type1.json", [&](const json& c) {
    const auto got = protocol::parse_type1(c.at("response").get<std::string>(), blocks(c));
    std::vector<std::pair<IdB, IdA>> want;
    for (const auto& p : c.at("pairs")) want.emplace_back(IdB{p[0].get<std::int64_t>()}, IdA{p[1].get<std::int64_t>()});
    return got.pairs == want && got.failed == c.at("failed").get<bool>();
  });
  run("type2.json", [&](const json& c) {
    const auto got = protocol::parse_type2(c.at("response").get<std::string>(), blocks(c), c.at("max_candidates").get<std::size_t>());
    if (got.failed != c.at("failed").get<bool>()) return false;
    const auto& want = c.at("ranked");
    if (got.ranked.size() != want.size()) return false;
    for (const auto& [b, list] : want.items()) {
      const auto it = got.ranked.find(IdB{std::stoll(b)});
      if (it == got.ranked.end() || it->second.size() != list.size()) return false;
      for (std::size_t k = 0; k < list.size(); ++k)
        if (value(it->second[k].first) != list[k][0].get<std::int64_t>() ||
            !near(it->second[k].second, list[k][1].get<double>(), 1e-12))
          return false;
    }
    return true;
  });
  run("tagged.json", [&](const json& c) {
    const auto got = sequential::parse_tagged(c.at("response").get<std::string>());
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (const auto& [b, a] : got.result_pairs) pairs.emplace_back(value(b), value(a));
    return got.count == c.at("count").get<int>() &&
           pairs == c.at("pairs").get<std::vector<std::pair<std::int64_t, std::int64_t>>>() &&
           got.missing == c.at("missing").get<std::vector<std::string>>() &&
           got.thinking == c.at("thinking").get<std::string>() && got.reflection == c.at("reflection").get<std::string>();
  });
  if (o.pass)
    o.detail = std::to_string(ok["type1.json"]) + " type 1, " + std::to_string(ok["type2.json"]) + " type 2, " +
               std::to_string(ok["tagged.json"]) + " tagged";
  return o;
}

std::map<std::string, std::string> expected_hashes() {
  std::map<std::string, std::string> out;
  std::istringstream in(read_file(kFixtures / "replay" / "expected_sha256.txt"));
  std::string sha, path;
  while (in >> sha >> path) out[path] = sha;
  return out;
}

std::map<std::string, std::string> replay_once(const fs::path& run_dir) {
  fs::remove_all(run_dir);
  auto j = json::parse(read_file(kFixtures / "replay" / "config.json"));
  j["run_dir"] = run_dir.string();
  const auto cfg = cli::parse_config(j, kFixtures / "replay");
  std::ostringstream sink;
  cli::cmd_collect(cfg, {}, true, sink);
  cli::cmd_judge(cfg, {}, false, sink);
  cli::cmd_ensemble(cfg, {}, false, sink);
  cli::cmd_ensemble(cfg, {}, true, sink);
  cli::cmd_sequential(cfg, true, sink);
  cli::cmd_report(cfg, sink);
  std::map<std::string, std::string> out;
  for (const char* sub : {"matrices", "assignments", "reports", "sequential"})
    for (const auto& e : fs::recursive_directory_iterator(run_dir / sub))
      if (e.is_regular_file()) out[fs::relative(e.path(), run_dir).generic_string()] = sha256_file(e.path());
  return out;
}

Outcome replay_determinism() {
  Outcome o;
  const auto tmp = fs::temp_directory_path() / "ebi_acceptance_replay";
  const auto first = replay_once(tmp / "one");
  const auto second = replay_once(tmp / "two");
  const auto want = expected_hashes();
  if (first != second) o.fail("the two runs differ");
  for (const auto& [path, sha] : want) {
    const auto it = first.find(path);
    if (it == first.end())
      o.fail("missing " + path);
    else if (it->second != sha)
      o.fail("hash mismatch on " + path);
  }
  if (first.size() != want.size()) o.fail("file count " + std::to_string(first.size()) + " vs " + std::to_string(want.size()));
  fs::remove_all(tmp);
  if (o.pass) o.detail = std::to_string(first.size()) + " files identical across 2 runs and to the committed hashes";
  return o;
}

Outcome sequential_termination() {
  Outcome o;
  const auto dir = kFixtures / "sequential";
  const auto d = load_dataset(dir / "a.csv", dir / "b.csv", dir / "truth.csv", {"Type"}, "conflict");
  auto script = clients::ScriptedBackend::from_file(dir / "conflict_script.json");
  sequential::SequentialConfig cfg;
  cfg.attribute_keys = {"Type"};
  const auto r = sequential::run_sequential(d, *script, cfg);
  std::string last;
  for (const auto& e : r.transcript)
    if (e.step == "S4" && e.role == "note") last = e.content;
  if (r.s4_iterations < 1 || r.s4_iterations > 10) o.fail("S4 iterations " + std::to_string(r.s4_iterations));
  if (last != "count=0") o.fail("last S4 note '" + last + "'");
  if (!r.flags.empty()) o.fail("flag " + r.flags.front());
  if (!is_bijection(r.assignment, d.axes())) o.fail("conflict output is not a bijection");

  const auto p1 = cli::synthetic_dataset(cli::default_groups(20), 7);
  clients::SyntheticJudgeConfig jc;
  jc.truth = *p1.truth;
  jc.accuracy = 1.0;
  jc.seed = 7;
  clients::SyntheticJudgeBackend perfect(jc);
  sequential::SequentialConfig pc;
  pc.attribute_keys = p1.attribute_keys;
  const auto rp = sequential::run_sequential(p1, perfect, pc);
  const int n_c = eval::score(rp.assignment, *p1.truth);
  if (n_c != static_cast<int>(p1.size())) o.fail("p=1 n_c " + std::to_string(n_c));
  if (rp.s4_iterations != 0) o.fail("p=1 ran S4");
  if (o.pass)
    o.detail = "conflict fixture: count=0 after " + std::to_string(r.s4_iterations) + " iterations; p=1: n_c=" +
               std::to_string(n_c) + "/" + std::to_string(p1.size());
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"metric vectors", metric_vectors},
      {"Bayes equivalence", bayes_equivalence},
      {"assignment properties", assignment_properties},
      {"ensemble of weak judges", weak_learners},
      {"parser corpus", parser_corpus},
      {"replay determinism", replay_determinism},
      {"sequential termination", sequential_termination},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %zu %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
