#include <doctest.h>

#include <mixfx/errors.hpp>
#include <mixfx/experiments.hpp>
#include <mixfx/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

using namespace mixfx;

namespace {

ExperimentConfig base_config() {
  ExperimentConfig cfg;
  cfg.model = "linear";
  cfg.theta0.weights = {1.0};
  cfg.theta0.means = {-0.5};
  cfg.theta0.omega2 = {0.25};
  cfg.ladder = {12, 24};
  cfg.replicates = 10;
  cfg.dt = 0.05;
  cfg.iid_design = {0.5, 1.0};
  cfg.restarts = 2;
  cfg.seed = 5;
  return cfg;
}

double zero_fn(double) { return 0.0; }
double ident(double x) { return x; }

bool has_path_prefix(const std::vector<Violation>& vs, const std::string& prefix) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) {
    return v.path.rfind(prefix, 0) == 0;
  });
}

} // namespace

TEST_SUITE("experiments") {

TEST_CASE("config validation: ladder, replicates, box paths, vanishing diffusion") {
  CHECK(validate_experiment_config(base_config()).empty());

  ExperimentConfig bad_ladder = base_config();
  bad_ladder.ladder = {50, 50};
  CHECK_FALSE(validate_experiment_config(bad_ladder).empty());

  ExperimentConfig few = base_config();
  few.replicates = 3;
  CHECK_FALSE(validate_experiment_config(few).empty());

  ExperimentConfig outside = base_config();
  outside.theta0.omega2[0] = -1.0;
  CHECK(has_path_prefix(validate_experiment_config(outside), "/theta0/"));

  ExperimentConfig bad_box = base_config();
  bad_box.box.mu_lo = 11.0; // lo >= hi
  CHECK(has_path_prefix(validate_experiment_config(bad_box), "/box/"));

  // a diffusion coefficient that vanishes on the working range is refused
  const SdeModel degenerate{"toy", ident, zero_fn, 2.0};
  CHECK_FALSE(validate_experiment_config(base_config(), degenerate).empty());
}

TEST_CASE("harmonic designs start at (x1, T1) and approach the limit point") {
  ExperimentConfig cfg = base_config();
  cfg.design_mode = DesignMode::NonIid;
  cfg.noniid = {1.0, 0.0, 2.0, 1.0};
  const auto designs = experiment_designs(cfg, 40);
  REQUIRE(designs.size() == 40);
  CHECK(designs[0].x0 == 1.0);
  CHECK(designs[0].T == 2.0);
  // i-th design: limit + (first - limit)/i
  CHECK(designs[9].x0 == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(designs[9].T == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(designs[39].x0 < designs[9].x0);
  CHECK(std::abs(designs[39].T - 1.0) < 0.03);

  ExperimentConfig iid = base_config();
  const auto same = experiment_designs(iid, 7);
  REQUIRE(same.size() == 7);
  for (const auto& d : same) {
    CHECK(d.x0 == 0.5);
    CHECK(d.T == 1.0);
  }
}

TEST_CASE("label matching undoes a component swap") {
  MixtureParams ref;
  ref.weights = {0.4, 0.6};
  ref.means = {-1.0, 2.0};
  ref.omega2 = {0.25, 0.5};
  MixtureParams swapped;
  swapped.weights = {0.61, 0.39};
  swapped.means = {1.9, -1.1};
  swapped.omega2 = {0.52, 0.24};
  const MixtureParams matched = match_labels(swapped, ref);
  CHECK(matched.means[0] == -1.1);
  CHECK(matched.means[1] == 1.9);
  CHECK(matched.weights[0] == 0.39);
}

TEST_CASE("consistency driver: complete report, stable under rerun and thread count") {
  const ExperimentConfig cfg = base_config();
  ExperimentReport a = run_consistency(cfg);
  CHECK(a.kind == "consistency");
  REQUIRE(a.ladder.size() == 2);
  CHECK(a.ladder[0].n == 12);
  CHECK(a.ladder[1].n == 24);
  CHECK(a.ladder[0].attempted == 10);
  REQUIRE(a.rows.size() == 20);
  CHECK_FALSE(a.value_columns.empty());
  for (const auto& row : a.rows)
    if (row.ok) REQUIRE(row.values.size() == a.value_columns.size());
  // the three verdicts this driver owes, in order
  REQUIRE(a.verdicts.size() == 3);
  CHECK(a.verdicts[0].name == "error_decreasing");
  CHECK(a.verdicts[1].name == "error_halved");
  CHECK(a.verdicts[2].name == "failure_rate");

  ExperimentReport b = run_consistency(cfg);
  REQUIRE(b.rows.size() == a.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    CHECK(a.rows[i].values == b.rows[i].values); // bitwise rerun

  // same numbers on a single thread: the parallel reduction is order-fixed
  const int saved = thread_budget();
  set_thread_budget(1);
  ExperimentReport c = run_consistency(cfg);
  set_thread_budget(saved);
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    CHECK(a.rows[i].values == c.rows[i].values);
}

TEST_CASE("normality driver fills per-coordinate KS and coverage columns") {
  ExperimentConfig cfg = base_config();
  cfg.ladder = {16};
  cfg.replicates = 12;
  ExperimentReport rep = run_mle_normality(cfg);
  CHECK(rep.kind == "mle_normality");
  REQUIRE(rep.ladder.size() == 1);
  CHECK(rep.ladder[0].ks.size() == 2);       // chart dim for M = 1
  CHECK(rep.ladder[0].coverage.size() == 2);
  for (double k : rep.ladder[0].ks) {
    CHECK(k >= 0.0);
    CHECK(k <= 1.0);
  }
  // Bayes point estimates are not what this driver studies
  ExperimentConfig wrong = cfg;
  wrong.estimator = Estimator::Bayes;
  CHECK_THROWS_AS((void)run_mle_normality(wrong), ConfigError);
}

TEST_CASE("posterior driver reports concentration and whitened-draw KS per rung") {
  ExperimentConfig cfg = base_config();
  cfg.ladder = {12, 20};
  cfg.replicates = 10;
  cfg.mcmc_iterations = 3000;
  ExperimentReport rep = run_posterior_asymptotics(cfg);
  CHECK(rep.kind == "posterior");
  REQUIRE(rep.ladder.size() == 2);
  for (const auto& rung : rep.ladder) {
    CHECK(rung.median_concentration >= 0.0);
    CHECK(rung.median_concentration <= 1.0);
    CHECK(rung.median_ks.size() == 2);
  }
  bool has_accept = false;
  for (const auto& v : rep.verdicts) has_accept = has_accept || v.name == "mcmc_acceptance";
  CHECK(has_accept);
}

TEST_CASE("KL/information limit driver produces shrinking-gap columns in design order") {
  ExperimentConfig cfg = base_config();
  cfg.design_mode = DesignMode::NonIid;
  cfg.noniid = {1.0, 0.5, 1.5, 1.0};
  cfg.ladder = {10, 20};
  cfg.replicates = 10; // seeds
  cfg.info_replicates = 40;
  cfg.limit_replicates = 400;
  ExperimentReport rep = empirical_kl_info_limits(cfg);
  CHECK(rep.kind == "kl_info_limits");
  REQUIRE(rep.rows.size() == 20);
  // rows are grouped by rung, then replicate
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const bool ordered = rep.rows[i - 1].n < rep.rows[i].n ||
                         (rep.rows[i - 1].n == rep.rows[i].n &&
                          rep.rows[i - 1].replicate < rep.rows[i].replicate);
    CHECK(ordered);
  }
  REQUIRE(rep.ladder.size() == 2);
  CHECK(rep.ladder[0].info_gap >= 0.0);
  CHECK(rep.ladder[0].kl_gap >= 0.0);
}

} // TEST_SUITE

