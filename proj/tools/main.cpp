// Command-line front end: reads a JSON config, drives the library, writes
// CSV/JSON artifacts, and prints a RunManifest as the last stdout line.
//
// Exit codes: 0 success, 2 config error, 3 estimation/simulation error,
// 4 experiment verdict failure, 1 anything unexpected.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mixfx/bayes.hpp"
#include "mixfx/catalogue.hpp"
#include "mixfx/config.hpp"
#include "mixfx/errors.hpp"
#include "mixfx/experiments.hpp"
#include "mixfx/io.hpp"
#include "mixfx/mle.hpp"
#include "mixfx/multidim.hpp"
#include "mixfx/parallel.hpp"
#include "mixfx/simulate.hpp"
#include "mixfx/suffstats.hpp"
#include "mixfx/version.hpp"

namespace fs = std::filesystem;
using namespace mixfx;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed; // overrides the config seed
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
  auto* c = cmd->add_option("--config", args.config_path, "JSON config file");
  if (config_required) c->required();
  cmd->add_option("--out-dir", args.out_dir, "output directory (created if missing)");
  cmd->add_option("--seed", args.seed, "seed override");
  cmd->add_option("--threads", args.threads, "worker thread cap");
}

std::string out_path(const CommonArgs& args, const std::string& name) {
  return (fs::path(args.out_dir) / name).string();
}

// Manifest assembly shared by every command.
struct ManifestScope {
  RunManifest manifest;

  explicit ManifestScope(const std::string& config_bytes, std::uint64_t seed) {
    manifest.config_hash = hex64(fnv1a64(config_bytes));
    manifest.seed = seed;
    manifest.version = kVersion;
    manifest.started_at = iso8601_utc_now();
  }

  void finish() {
    manifest.finished_at = iso8601_utc_now();
    std::cout << manifest.to_json() << "\n";
  }
};

std::vector<SubjectDesign> simulate_designs(const SimulateConfig& cfg) {
  std::vector<SubjectDesign> designs(cfg.n);
  if (cfg.design_mode == DesignMode::Iid) {
    std::fill(designs.begin(), designs.end(), cfg.design);
  } else {
    for (std::size_t i = 1; i <= cfg.n; ++i) {
      const double inv = 1.0 / static_cast<double>(i);
      designs[i - 1].x0 = cfg.noniid.x_inf + (cfg.noniid.x1 - cfg.noniid.x_inf) * inv;
      designs[i - 1].T = cfg.noniid.T_inf + (cfg.noniid.T1 - cfg.noniid.T_inf) * inv;
    }
  }
  return designs;
}

int cmd_simulate(const CommonArgs& args) {
  const std::string text = read_text_file(args.config_path);
  SimulateConfig cfg = parse_simulate_config(text);
  if (args.seed) cfg.seed = *args.seed;
  ManifestScope scope(text, cfg.seed);

  const SdeModel& model = find_model(cfg.model);
  const Cohort cohort =
      make_cohort(model, cfg.theta0, simulate_designs(cfg), cfg.dt, cfg.seed);

  fs::create_directories(args.out_dir);
  const std::string cohort_csv = out_path(args, "cohort.csv");
  const std::string sidecar = out_path(args, "sidecar.json");
  write_cohort_csv(cohort_csv, cohort);
  write_text_file(sidecar, cohort_sidecar_json(cohort));

  scope.manifest.outputs = {cohort_csv, sidecar};
  scope.finish();
  return 0;
}

int cmd_suffstats(const CommonArgs& args) {
  const std::string text = read_text_file(args.config_path);
  const SuffstatsConfig cfg = parse_suffstats_config(text);
  ManifestScope scope(text, 0);

  const SdeModel& model = find_model(cfg.model);
  const Cohort cohort = read_cohort_csv(cfg.cohort_csv);
  const std::vector<SuffStats> stats = cohort_suffstats(model, cohort);

  fs::create_directories(args.out_dir);
  const std::string stats_csv = out_path(args, "stats.csv");
  write_stats_csv(stats_csv, stats);

  scope.manifest.outputs = {stats_csv};
  scope.finish();
  return 0;
}

int cmd_fit(const CommonArgs& args) {
  const std::string text = read_text_file(args.config_path);
  FitConfig cfg = parse_fit_config(text);
  if (args.seed) cfg.seed = *args.seed;
  ManifestScope scope(text, cfg.seed);

  const std::vector<SuffStats> stats = read_stats_csv(cfg.stats_csv);
  fs::create_directories(args.out_dir);

  if (cfg.method == "bayes") {
    const FitResult warm =
        multistart_fit(stats, cfg.M, cfg.box, cfg.restarts, cfg.seed, cfg.em);
    MhOptions mh;
    mh.iterations = cfg.mcmc_iterations;
    mh.seed = cfg.seed;
    mh.init = warm.theta_hat;
    const Chain chain = mh_sample(stats, cfg.M, cfg.prior, mh);

    const std::string chain_csv = out_path(args, "chain.csv");
    const std::string summary = out_path(args, "chain_summary.json");
    write_chain_csv(chain_csv, chain);
    write_text_file(summary, chain_summary_json(chain));
    scope.manifest.outputs = {chain_csv, summary};
  } else {
    const FitResult fit =
        cfg.method == "em"
            ? multistart_fit(stats, cfg.M, cfg.box, cfg.restarts, cfg.seed, cfg.em)
            : direct_fit(stats, cfg.M, cfg.box,
                         moment_init(stats, cfg.M, cfg.box), cfg.em);
    const std::string fit_path = out_path(args, "fit.json");
    write_text_file(fit_path, fit_json(fit, cfg.method));
    scope.manifest.outputs = {fit_path};
  }
  scope.finish();
  return 0;
}

int cmd_experiment(const CommonArgs& args) {
  const std::string text = read_text_file(args.config_path);
  ExperimentFileConfig file = parse_experiment_file(text);
  if (args.seed) file.exp.seed = *args.seed;
  ManifestScope scope(text, file.exp.seed);

  ExperimentReport report;
  if (file.kind == "consistency") report = run_consistency(file.exp);
  else if (file.kind == "mle_normality") report = run_mle_normality(file.exp);
  else if (file.kind == "posterior") report = run_posterior_asymptotics(file.exp);
  else report = empirical_kl_info_limits(file.exp);

  fs::create_directories(args.out_dir);
  const std::string report_path = out_path(args, "report.json");
  const std::string csv_path = out_path(args, "report.csv");
  write_text_file(report_path, report_json(report));
  write_report_csv(csv_path, report);

  scope.manifest.outputs = {report_path, csv_path};
  scope.finish();
  return report.all_pass() ? 0 : 4;
}

int cmd_info(const CommonArgs& args) {
  std::string text;
  if (!args.config_path.empty()) text = read_text_file(args.config_path);
  ManifestScope scope(text, 0);

  std::cout << "models:\n";
  for (const auto& m : catalogue())
    std::cout << "  " << m.name << " (growth exponent " << m.tau << ")\n";
  std::cout << "multidimensional models:\n";
  for (const auto& m : mv_catalogue())
    std::cout << "  " << m.name << " (d=" << m.d << ")\n";
  std::cout << "commands: simulate suffstats fit experiment info\n"
            << "schema_version: " << kSchemaVersion << "\n"
            << "exit codes: 0 ok, 2 config, 3 estimation, 4 verdict failure\n";

  scope.finish();
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"SDE mixed-effects toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* sim = app.add_subcommand("simulate", "simulate a cohort of paths");
  CLI::App* suf = app.add_subcommand("suffstats", "reduce a cohort to statistics");
  CLI::App* fit = app.add_subcommand("fit", "fit a mixture to statistics");
  CLI::App* exp = app.add_subcommand("experiment", "run a Monte Carlo experiment");
  CLI::App* inf = app.add_subcommand("info", "print the catalogue and schema");
  for (CLI::App* c : {sim, suf, fit, exp}) add_common(c, args, true);
  add_common(inf, args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (args.threads) set_thread_budget(*args.threads);

  try {
    if (sim->parsed()) return cmd_simulate(args);
    if (suf->parsed()) return cmd_suffstats(args);
    if (fit->parsed()) return cmd_fit(args);
    if (exp->parsed()) return cmd_experiment(args);
    return cmd_info(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SimulationError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return 3;
  } catch (const DegenerateStatsError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const EstimationError& e) {
    std::cerr << "estimation error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
