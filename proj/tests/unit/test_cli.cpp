#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "ebi/cli/commands.hpp"
#include "ebi/cli/config.hpp"
#include "ebi/cli/synth.hpp"
#include "ebi/core/csv.hpp"
#include "ebi/core/error.hpp"
#include "ebi/core/hashing.hpp"
#include "support/builders.hpp"

using namespace ebi;
using namespace ebi::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = EBI_FIXTURE_DIR;

json minimal_config() {
  return json::parse(R"({
    "datasets": {"d": {"a": "a.csv", "b": "b.csv", "truth": "truth.csv", "attribute_keys": ["Type"],
                       "baselines": {"human": 3, "llm": 4}}},
    "models": {"m": {"type": "synthetic", "accuracy": 0.5}},
    "systems": [{"system_id": 7, "model": "m", "c": {"type": 1, "calls": 2}, "s": {"type": 2, "calls": 1}}]
  })");
}

int run(const std::vector<std::string>& args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::string synth_dir(const std::string& name, const std::vector<std::string>& extra) {
  const auto dir = testing_util::temp_dir(name);
  std::vector<std::string> args{"synth", "-o", dir.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  REQUIRE(run(args) == 0);
  return dir.string();
}

void write_config(const fs::path& dir, const json& j) {
  std::ofstream(dir / "config.json") << j.dump(2);
}

}  // namespace

TEST_CASE("config: paths resolve against the config directory") {
  const auto cfg = parse_config(minimal_config(), "/data/exp");
  CHECK(cfg.datasets.at("d").a == fs::path("/data/exp/a.csv"));
  CHECK(cfg.run_dir == fs::path("/data/exp/run"));
  CHECK(cfg.systems.at(0).dataset == "d");
  CHECK(cfg.systems.at(0).spec.s_protocol.ptype == 2);
  CHECK(cfg.replay_mode == clients::ReplayMode::off);
}

TEST_CASE("config: bad references are rejected before anything runs") {
  auto j = minimal_config();
  j["systems"][0]["model"] = "nope";
  CHECK_THROWS_AS(parse_config(j, "/x"), UsageError);

  j = minimal_config();
  j["systems"][0]["s"]["delegate_model"] = "ghost";
  CHECK_THROWS_AS(parse_config(j, "/x"), UsageError);

  j = minimal_config();
  j["systems"][0]["dataset"] = "other";
  CHECK_THROWS_AS(parse_config(j, "/x"), UsageError);

  j = minimal_config();
  j["systems"].push_back(j["systems"][0]);
  CHECK_THROWS_AS(parse_config(j, "/x"), UsageError);

  j = minimal_config();
  j["ensembles"] = json::parse(R"([{"components": [7, 8]}])");
  CHECK_THROWS_AS(parse_config(j, "/x"), UsageError);

  j = minimal_config();
  j["sequential"] = {{"model", "missing"}};
  CHECK_THROWS_AS(parse_config(j, "/x"), UsageError);

  j = minimal_config();
  j["systmes"] = json::array();
  CHECK_THROWS_AS(parse_config(j, "/x"), UsageError);

  j = minimal_config();
  j["datasets"] = json::object();
  CHECK_THROWS_AS(parse_config(j, "/x"), UsageError);

  j = minimal_config();
  j["systems"][0]["c"]["calls"] = 0;
  CHECK_THROWS_AS(parse_config(j, "/x"), UsageError);
}

TEST_CASE("config: sequential defaults to the dataset's attribute keys") {
  auto j = minimal_config();
  j["sequential"] = {{"model", "m"}};
  const auto cfg = parse_config(j, "/x");
  REQUIRE(cfg.sequential);
  CHECK(cfg.sequential->config.attribute_keys == std::vector<std::string>{"Type"});
  CHECK(cfg.sequential->config.recursion_threshold == 2);
  CHECK(cfg.sequential->config.max_conflict_iterations == 10);
}

TEST_CASE("unknown system id is a usage error listing the known ids") {
  const fs::path dir = synth_dir("cli_unknown", {"-n", "4"});
  std::string err;
  CHECK(run({"collect", "-c", (dir / "config.json").string(), "--systems", "42"}, nullptr, &err) == 2);
  CHECK(err.find("known: 1,2,3,4,5") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({}) == 2);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({"judge"}) == 2);
  CHECK(run({"--help"}) == 0);
  CHECK(run({"report", "-c", "/nonexistent/config.json"}) == 2);
  // judging before collecting is a domain error
  const fs::path dir = synth_dir("cli_codes", {"-n", "4"});
  std::string err;
  CHECK(run({"judge", "-c", (dir / "config.json").string()}, nullptr, &err) == 1);
  CHECK(err.find("run collect first") != std::string::npos);
}

TEST_CASE("synth: same seed, same files") {
  const fs::path a = synth_dir("cli_synth_a", {"--seed", "9", "--run"});
  const fs::path b = synth_dir("cli_synth_b", {"--seed", "9", "--run"});
  for (const auto* f : {"a.csv", "b.csv", "truth.csv", "config.json", "run/reports/summary.json",
                        "run/matrices/system_3_J.csv", "run/assignments/ensemble_100.json"}) {
    CAPTURE(f);
    CHECK(read_file(a / f) == read_file(b / f));
  }
  const fs::path c = synth_dir("cli_synth_c", {"--seed", "10"});
  CHECK(read_file(a / "truth.csv") != read_file(c / "truth.csv"));
}

TEST_CASE("synth: p=0 on n=2 scores zero, p=1 scores everything") {
  for (auto [p, want] : std::vector<std::pair<std::string, int>>{{"0", 0}, {"1", 2}}) {
    const fs::path dir = synth_dir("cli_synth_p" + p, {"-n", "2", "--judges", p, "--run"});
    const auto row = json::parse(read_file(dir / "run/reports/system_1.json"));
    CHECK(row.at("metrics").at("n_c").get<int>() == want);
    CHECK(row.at("metrics").at("acc").get<double>() == doctest::Approx(50.0 * want));
  }
  const fs::path dir = synth_dir("cli_synth_p1_big", {"-n", "13", "--judges", "1", "--run"});
  CHECK(json::parse(read_file(dir / "run/reports/system_1.json")).at("metrics").at("acc").get<double>() == 100.0);
}

TEST_CASE("synth: default groups") {
  CHECK(default_groups(20) == std::vector<int>{7, 7, 6});
  CHECK(default_groups(7) == std::vector<int>{7});
  CHECK(default_groups(50) == std::vector<int>{7, 7, 6, 6, 6, 6, 6, 6});
  const auto d = synthetic_dataset({3, 2}, 1);
  validate(d);
  for (const auto& [b, a] : *d.truth) {
    CHECK(*d.record_b(b).attribute("Type") == *d.record_a(a).attribute("Type"));
  }
}

TEST_CASE("collect rerun issues nothing new; strict replay serves from cache") {
  const fs::path dir = synth_dir("cli_resume", {"-n", "5", "--judges", "0.5,0.6", "--calls", "3"});
  auto j = json::parse(read_file(dir / "config.json"));
  j["replay"] = {{"mode", "replay"}, {"dir", "cache"}};
  write_config(dir, j);
  const auto cfg = load_config(dir / "config.json");
  std::ostringstream sink;
  const auto first = cmd_collect(cfg, {}, false, sink);
  CHECK(first.at(0).issued == 30);
  const auto second = cmd_collect(cfg, {}, false, sink);
  CHECK(second.at(0).issued == 0);
  CHECK(second.at(0).resumed == 30);

  // a fresh run directory fed only by the cache
  const auto c1 = read_file(dir / "run/matrices/system_1_c.csv");
  j["run_dir"] = "run2";
  write_config(dir, j);
  const auto cfg2 = load_config(dir / "config.json");
  cmd_collect(cfg2, {}, true, sink);
  CHECK(read_file(dir / "run2/matrices/system_1_c.csv") == c1);

  // strict replay with an empty cache fails with a domain error
  j["replay"]["dir"] = "empty_cache";
  j["run_dir"] = "run3";
  write_config(dir, j);
  std::string err;
  CHECK(run({"collect", "-c", (dir / "config.json").string(), "--strict-replay"}, nullptr, &err) == 1);
  CHECK(err.find("cache") != std::string::npos);
}

TEST_CASE("judge --oracle reports the optimum next to the greedy total") {
  const fs::path dir = synth_dir("cli_oracle", {"-n", "6", "--judges", "0.5"});
  REQUIRE(run({"collect", "-c", (dir / "config.json").string()}) == 0);
  std::string out;
  REQUIRE(run({"judge", "-c", (dir / "config.json").string(), "--oracle"}, &out) == 0);
  CHECK(out.find("optimal total") != std::string::npos);
  const auto row = json::parse(read_file(dir / "run/reports/system_1.json"));
  CHECK(row.at("optimal_total").get<double>() >= row.at("greedy_total").get<double>() - 1e-12);
}

TEST_CASE("ensembles: singleton equals the system row, grid sizes, equal weights beat the mean") {
  const fs::path dir = synth_dir("cli_ens", {"--seed", "4", "--concentration", "0.2"});
  auto j = json::parse(read_file(dir / "config.json"));
  j["ensembles"].push_back({{"ensemble_id", 3}, {"components", {3}}, {"weights", {2.5}}});
  j["search"] = {{"components", {1, 2, 3}}, {"values", {1, 2, 3}}, {"top", 4}};
  write_config(dir, j);
  const auto cfgp = (dir / "config.json").string();
  REQUIRE(run({"collect", "-c", cfgp}) == 0);
  REQUIRE(run({"judge", "-c", cfgp}) == 0);
  REQUIRE(run({"ensemble", "-c", cfgp}) == 0);
  std::string out;
  REQUIRE(run({"ensemble", "-c", cfgp, "--search"}, &out) == 0);
  CHECK(out.find("27 candidates") != std::string::npos);
  CHECK(csv::parse(read_file(dir / "run/reports/search.csv")).size() == 28);

  const auto single = json::parse(read_file(dir / "run/reports/system_3.json")).at("metrics");
  const auto ens = json::parse(read_file(dir / "run/reports/ensemble_3.json")).at("report");
  CHECK(single == ens);

  double mean = 0;
  for (int id = 1; id <= 5; ++id) {
    const auto rel = "run/reports/system_" + std::to_string(id) + ".json";
    mean += json::parse(read_file(dir / rel)).at("metrics").at("acc").get<double>();
  }
  mean /= 5;
  const auto combined = json::parse(read_file(dir / "run/reports/ensemble_100.json")).at("report").at("acc").get<double>();
  CHECK(combined > mean);

  std::string summary;
  REQUIRE(run({"report", "-c", cfgp}, &summary) == 0);
  CHECK(summary.find("{1,2,3,4,5}") != std::string::npos);
  CHECK(summary.find("stale") == std::string::npos);
}

TEST_CASE("report flags rows whose inputs changed and rejects tampered files") {
  const fs::path dir = synth_dir("cli_stale", {"-n", "6", "--run"});
  const auto cfgp = (dir / "config.json").string();
  // re-collecting one system rewrites its matrices but not its report
  auto j = json::parse(read_file(dir / "config.json"));
  j["systems"][0]["c"]["calls"] = 2;
  write_config(dir, j);
  REQUIRE(run({"collect", "-c", cfgp, "--systems", "1"}) == 0);
  std::string out;
  REQUIRE(run({"report", "-c", cfgp}, &out) == 0);
  CHECK(out.find("stale: reports/system_1.json") != std::string::npos);

  std::ofstream(dir / "run/reports/system_2.json", std::ios::app) << " ";
  std::string err;
  CHECK(run({"report", "-c", cfgp}, nullptr, &err) == 1);
  CHECK(err.find("system_2.json") != std::string::npos);
}

TEST_CASE("sequential command: scripted conflict fixture and perfect judge") {
  const auto dir = testing_util::temp_dir("cli_seq");
  const auto fx = kFixtures / "sequential";
  json j{{"datasets",
          {{"conflict",
            {{"a", (fx / "a.csv").string()},
             {"b", (fx / "b.csv").string()},
             {"truth", (fx / "truth.csv").string()},
             {"attribute_keys", {"Type"}},
             {"baselines", {{"human", 2}, {"llm", 3}}}}}}},
         {"models", {{"script", {{"type", "scripted"}, {"script", (fx / "conflict_script.json").string()}}}}},
         {"sequential", {{"model", "script"}}}};
  write_config(dir, j);
  std::string out;
  REQUIRE(run({"sequential", "-c", (dir / "config.json").string()}, &out) == 0);
  const auto report = json::parse(read_file(dir / "run/sequential/report.json"));
  CHECK(report.at("s4_iterations").get<int>() == 2);
  CHECK(report.at("n_c").get<int>() == 4);
  CHECK(report.at("flags").empty());
  const auto first = sha256_hex(read_file(dir / "run/sequential/transcript.jsonl"));
  REQUIRE(run({"sequential", "-c", (dir / "config.json").string()}) == 0);
  CHECK(sha256_hex(read_file(dir / "run/sequential/transcript.jsonl")) == first);

  const fs::path sdir = synth_dir("cli_seq_p1", {"--judges", "1"});
  REQUIRE(run({"sequential", "-c", (sdir / "config.json").string()}) == 0);
  const auto perfect = json::parse(read_file(sdir / "run/sequential/report.json"));
  CHECK(perfect.at("n_c").get<int>() == 20);
  CHECK(perfect.at("s4_iterations").get<int>() == 0);
}

TEST_CASE("sequential failure keeps the partial transcript") {
  const auto dir = testing_util::temp_dir("cli_seq_fail");
  const auto fx = kFixtures / "sequential";
  json script{{"rules", json::array({{{"when_contains", "evaluate `id_B=1`"}, {"response", "{\"id_A\": 11}"}}})}};
  std::ofstream(dir / "short.json") << script.dump();
  json j{{"datasets",
          {{"conflict",
            {{"a", (fx / "a.csv").string()}, {"b", (fx / "b.csv").string()}, {"truth", (fx / "truth.csv").string()},
             {"attribute_keys", {"Type"}}}}}},
         {"models", {{"script", {{"type", "scripted"}, {"script", "short.json"}}}}},
         {"sequential", {{"model", "script"}}}};
  write_config(dir, j);
  std::string err;
  CHECK(run({"sequential", "-c", (dir / "config.json").string()}, nullptr, &err) == 1);
  CHECK(err.find("script exhausted") != std::string::npos);
  const auto partial = read_file(dir / "run/sequential/transcript.partial.jsonl");
  CHECK(partial.find("evaluate `id_B=1`") != std::string::npos);
}
