#include <algorithm>

#include "CLI11.hpp"
#include "ebi/cli/commands.hpp"
#include "ebi/core/error.hpp"

namespace ebi::cli {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ebi: ensemble Bayesian inference for profile identity matching"};
  app.require_subcommand(1);
  app.name("ebi");

  std::string config;
  std::vector<int> systems;
  std::vector<int> ensembles;
  bool strict = false;
  bool oracle = false;
  bool search = false;
  SynthOptions synth;
  std::string synth_out;

  auto* collect = app.add_subcommand("collect", "Query models and persist c and s matrices");
  collect->add_option("-c,--config", config, "Run config (JSON)")->required();
  collect->add_option("--systems", systems, "System ids, default all")->delimiter(',');
  collect->add_flag("--strict-replay", strict, "Serve every call from the replay cache; a miss is an error");

  auto* judge = app.add_subcommand("judge", "Confidence, judgment, greedy assignment and metrics per system");
  judge->add_option("-c,--config", config, "Run config (JSON)")->required();
  judge->add_option("--systems", systems, "System ids, default all")->delimiter(',');
  judge->add_flag("--oracle", oracle, "Also report the optimal assignment total");

  auto* ens = app.add_subcommand("ensemble", "Evaluate declared ensembles and the weight search");
  ens->add_option("-c,--config", config, "Run config (JSON)")->required();
  ens->add_option("--ensembles", ensembles, "Ensemble ids, default all")->delimiter(',');
  ens->add_flag("--search", search, "Run the configured weight search");

  auto* seq = app.add_subcommand("sequential", "Run the sequential-thinking baseline");
  seq->add_option("-c,--config", config, "Run config (JSON)")->required();
  seq->add_flag("--strict-replay", strict, "Serve every call from the replay cache; a miss is an error");

  auto* rep = app.add_subcommand("report", "Verify the run directory and write the summary tables");
  rep->add_option("-c,--config", config, "Run config (JSON)")->required();

  auto* syn = app.add_subcommand("synth", "Write a synthetic dataset and a judge-backed config");
  syn->add_option("-o,--out", synth_out, "Output directory")->required();
  syn->add_option("-n,--n", synth.n, "Records per side")->capture_default_str();
  syn->add_option("--groups", synth.groups, "Attribute group sizes, default blocks of at most 7")->delimiter(',');
  syn->add_option("--judges", synth.judges, "Judge accuracies")->delimiter(',')->capture_default_str();
  syn->add_option("--calls", synth.calls, "Type 1 calls per target")->capture_default_str();
  syn->add_option("--concentration", synth.concentration, "Dirichlet concentration of judge decoys, 0 = uniform")
      ->capture_default_str();
  syn->add_option("--seed", synth.seed, "Seed")->capture_default_str();
  syn->add_flag("--run", synth.run, "Also run collect, judge, ensemble and report");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (syn->parsed()) {
      synth.out_dir = synth_out;
      cmd_synth(synth, out);
      return 0;
    }
    const auto cfg = load_config(config);
    if (collect->parsed()) {
      cmd_collect(cfg, systems, strict, out);
    } else if (judge->parsed()) {
      cmd_judge(cfg, systems, oracle, out);
    } else if (ens->parsed()) {
      cmd_ensemble(cfg, ensembles, search, out);
    } else if (seq->parsed()) {
      cmd_sequential(cfg, strict, out);
    } else if (rep->parsed()) {
      cmd_report(cfg, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ebi::cli
