#include "mixfx/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "mixfx/chart.hpp"
#include "mixfx/errors.hpp"
#include "mixfx/labels.hpp"
#include "mixfx/likelihood.hpp"
#include "mixfx/parallel.hpp"
#include "mixfx/rng.hpp"
#include "mixfx/statsutil.hpp"
#include "mixfx/suffstats.hpp"
#include "mle_internal.hpp"

namespace mixfx {

namespace {

// Seed stream tags: salt (what) | ladder rung (where) | replicate (which).
std::uint64_t tag(std::uint64_t salt, std::size_t rung, std::size_t rep) {
  return (salt << 56) | (static_cast<std::uint64_t>(rung) << 48) |
         static_cast<std::uint64_t>(rep);
}

constexpr std::uint64_t kSimSalt = 1;
constexpr std::uint64_t kFitSalt = 2;
constexpr std::uint64_t kMcmcSalt = 3;
constexpr std::uint64_t kOracleSalt = 4;
constexpr std::uint64_t kInfoSalt = 5;
constexpr std::uint64_t kKlSalt = 6;

double median_of(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

std::vector<double> flatten(const MixtureParams& theta) {
  std::vector<double> out;
  out.reserve(3 * theta.M());
  out.insert(out.end(), theta.weights.begin(), theta.weights.end());
  out.insert(out.end(), theta.means.begin(), theta.means.end());
  out.insert(out.end(), theta.omega2.begin(), theta.omega2.end());
  return out;
}

std::vector<std::string> natural_columns(std::size_t M) {
  std::vector<std::string> cols;
  for (std::size_t k = 0; k < M; ++k) cols.push_back("a" + std::to_string(k));
  for (std::size_t k = 0; k < M; ++k) cols.push_back("mu" + std::to_string(k));
  for (std::size_t k = 0; k < M; ++k) cols.push_back("omega2_" + std::to_string(k));
  return cols;
}

void throw_on_violations(const std::vector<Violation>& vs) {
  if (!vs.empty()) throw ConfigError(vs.front().path, vs.front().message);
}

// Point estimate per the configured estimator. Bayes uses the posterior mean
// of the chart draws around an EM warm start.
FitResult fit_stats(const ExperimentConfig& cfg, std::span<const SuffStats> stats,
                    std::uint64_t fit_seed, std::uint64_t mcmc_seed) {
  const std::size_t M = cfg.theta0.M();
  switch (cfg.estimator) {
    case Estimator::Em:
      return multistart_fit(stats, M, cfg.box, cfg.restarts, fit_seed);
    case Estimator::Direct:
      return direct_fit(stats, M, cfg.box, moment_init(stats, M, cfg.box));
    case Estimator::Bayes: {
      FitResult warm = multistart_fit(stats, M, cfg.box, cfg.restarts, fit_seed);
      PriorSpec prior = cfg.prior;
      prior.box = cfg.box;
      MhOptions mh;
      mh.iterations = cfg.mcmc_iterations;
      mh.seed = mcmc_seed;
      mh.init = warm.theta_hat;
      const Chain chain = mh_sample(stats, M, prior, mh);
      const Eigen::Index kept = static_cast<Eigen::Index>(chain.kept());
      const Eigen::VectorXd eta_mean =
          chain.draws.bottomRows(kept).colwise().mean().transpose();
      FitResult out = warm;
      out.theta_hat = canonicalize_labels(
          detail::clip_into_box(from_chart(eta_mean, M), cfg.box));
      out.reason = "posterior_mean";
      return out;
    }
  }
  throw InternalError("unknown estimator");
}

struct RungAccumulator {
  std::vector<ReplicateRow> rows;
  std::size_t failed = 0;
};

// Column extractor over completed replicates.
std::vector<double> column(const std::vector<ReplicateRow>& rows, std::size_t j) {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.ok) out.push_back(r.values[j]);
  return out;
}

Verdict decreasing_verdict(const std::string& name,
                           const std::vector<double>& series, bool strict) {
  Verdict v{name, "pass", ""};
  if (series.size() < 2) {
    v.status = "skipped";
    v.detail = "ladder has fewer than two rungs";
    return v;
  }
  for (std::size_t i = 1; i < series.size(); ++i) {
    const bool ok = strict ? series[i] < series[i - 1] : series[i] <= series[i - 1];
    if (!ok) {
      v.status = "fail";
      v.detail = "violated between rungs " + std::to_string(i - 1) + " and " +
                 std::to_string(i);
      return v;
    }
  }
  return v;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

} // namespace

bool ExperimentReport::all_pass() const {
  return std::none_of(verdicts.begin(), verdicts.end(),
                      [](const Verdict& v) { return v.status == "fail"; });
}

std::vector<SubjectDesign> experiment_designs(const ExperimentConfig& cfg,
                                              std::size_t n) {
  std::vector<SubjectDesign> out(n);
  if (cfg.design_mode == DesignMode::Iid) {
    std::fill(out.begin(), out.end(), cfg.iid_design);
  } else {
    for (std::size_t i = 1; i <= n; ++i) {
      const double inv = 1.0 / static_cast<double>(i);
      out[i - 1].x0 = cfg.noniid.x_inf + (cfg.noniid.x1 - cfg.noniid.x_inf) * inv;
      out[i - 1].T = cfg.noniid.T_inf + (cfg.noniid.T1 - cfg.noniid.T_inf) * inv;
    }
  }
  return out;
}

MixtureParams match_labels(const MixtureParams& fitted,
                           const MixtureParams& reference) {
  if (fitted.M() != reference.M())
    throw InternalError("match_labels: component counts differ");
  const std::size_t M = fitted.M();
  std::vector<std::size_t> perm(M), best_perm(M);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  best_perm = perm;
  double best = std::numeric_limits<double>::infinity();
  do {
    double sse = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
      const std::size_t j = perm[k];
      const double da = fitted.weights[j] - reference.weights[k];
      const double dm = fitted.means[j] - reference.means[k];
      const double dw = fitted.omega2[j] - reference.omega2[k];
      sse += da * da + dm * dm + dw * dw;
    }
    if (sse < best) {
      best = sse;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return apply_permutation(fitted, best_perm);
}

std::vector<Violation> validate_experiment_config(const ExperimentConfig& cfg,
                                                  const SdeModel& model) {
  std::vector<Violation> out = validate_params(cfg.theta0, cfg.theta0.M(), cfg.box);
  for (auto& v : out) v.path = "/theta0/" + v.path;
  for (const auto& v : validate_box(cfg.box))
    out.push_back({"/box/" + v.path, v.message});

  if (cfg.theta0.M() == 0) out.push_back({"/theta0", "needs at least one component"});
  if (cfg.ladder.empty()) out.push_back({"/ladder", "must not be empty"});
  for (std::size_t i = 1; i < cfg.ladder.size(); ++i)
    if (cfg.ladder[i] <= cfg.ladder[i - 1]) {
      out.push_back({"/ladder", "must be strictly increasing"});
      break;
    }
  if (cfg.replicates < 10) out.push_back({"/replicates", "needs at least 10"});
  if (!(cfg.dt > 0.0)) out.push_back({"/dt", "must be positive"});
  if (cfg.design_mode == DesignMode::Iid) {
    if (!(cfg.iid_design.T > 0.0)) out.push_back({"/design/T", "must be positive"});
  } else {
    if (!(cfg.noniid.T1 > 0.0) || !(cfg.noniid.T_inf > 0.0))
      out.push_back({"/design/T", "horizons must be positive"});
  }
  if (cfg.mcmc_iterations < 1000)
    out.push_back({"/mcmc_iterations", "needs at least 1000"});
  if (cfg.info_replicates < 10)
    out.push_back({"/info_replicates", "needs at least 10"});

  // Zero-noise guard: the diffusion coefficient must stay away from 0, or the
  // statistics degenerate (every 1/sigma^2 blows up).
  double sig_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 200; ++i) {
    const double x = -50.0 + 0.5 * i;
    sig_min = std::min(sig_min, std::abs(model.sigma(x)));
  }
  if (!(sig_min > 1e-8))
    out.push_back({"/model", "diffusion coefficient vanishes (zero-noise mode rejected)"});
  return out;
}

std::vector<Violation> validate_experiment_config(const ExperimentConfig& cfg) {
  return validate_experiment_config(cfg, find_model(cfg.model));
}

ExperimentReport run_consistency(const ExperimentConfig& cfg) {
  const SdeModel& model = find_model(cfg.model);
  throw_on_violations(validate_experiment_config(cfg, model));
  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t M = cfg.theta0.M();
  const std::size_t P = 3 * M;
  const std::vector<double> truth = flatten(cfg.theta0);

  ExperimentReport rep;
  rep.kind = "consistency";
  rep.value_columns = natural_columns(M);
  rep.value_columns.push_back("loglik");

  for (std::size_t li = 0; li < cfg.ladder.size(); ++li) {
    const std::size_t n = cfg.ladder[li];
    std::vector<ReplicateRow> rows(cfg.replicates);
    const std::vector<SubjectDesign> designs = experiment_designs(cfg, n);

    parallel_for(cfg.replicates, [&](std::size_t r) {
      ReplicateRow& row = rows[r];
      row.n = n;
      row.replicate = r;
      try {
        const CohortStats cs = simulate_cohort_stats(
            model, cfg.theta0, designs, cfg.dt,
            derive_seed(cfg.seed, tag(kSimSalt, li, r)));
        const FitResult fit =
            fit_stats(cfg, cs.stats, derive_seed(cfg.seed, tag(kFitSalt, li, r)),
                      derive_seed(cfg.seed, tag(kMcmcSalt, li, r)));
        const MixtureParams matched = match_labels(fit.theta_hat, cfg.theta0);
        row.values = flatten(matched);
        row.values.push_back(fit.final_loglik());
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    });

    LadderSummary sum;
    sum.n = n;
    sum.attempted = cfg.replicates;
    sum.failed = static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(),
                      [](const ReplicateRow& r) { return !r.ok; }));
    for (std::size_t j = 0; j < P; ++j) {
      std::vector<double> errs;
      for (const auto& r : rows)
        if (r.ok) errs.push_back(std::abs(r.values[j] - truth[j]));
      if (errs.empty()) {
        sum.rmse.push_back(std::numeric_limits<double>::quiet_NaN());
        sum.median_abs_err.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double sq = 0.0;
      for (double e : errs) sq += e * e;
      sum.rmse.push_back(std::sqrt(sq / static_cast<double>(errs.size())));
      sum.median_abs_err.push_back(median_of(errs));
    }
    rep.ladder.push_back(std::move(sum));
    for (auto& r : rows) rep.rows.push_back(std::move(r));
  }

  // Verdicts: per-coordinate median error must fall along the ladder, the
  // last/first ratio must at least halve, and failures must stay under 10%.
  bool mono_ok = true, ratio_ok = true;
  std::string mono_detail, ratio_detail;
  if (rep.ladder.size() >= 2) {
    for (std::size_t j = 0; j < P; ++j) {
      std::vector<double> series;
      for (const auto& s : rep.ladder) series.push_back(s.median_abs_err[j]);
      // Coordinates that are exact at every rung are pinned by construction
      // (the weight at M=1); no decrease is possible or required.
      if (std::all_of(series.begin(), series.end(),
                      [](double e) { return e == 0.0; }))
        continue;
      for (std::size_t i = 1; i < series.size(); ++i)
        if (!(series[i] < series[i - 1])) {
          mono_ok = false;
          mono_detail = rep.value_columns[j] + " rose at rung " + std::to_string(i);
        }
      const double ratio = series.back() / series.front();
      if (!(ratio < 0.5)) {
        ratio_ok = false;
        ratio_detail = rep.value_columns[j] + " ratio " + fmt(ratio);
      }
    }
    rep.verdicts.push_back({"error_decreasing", mono_ok ? "pass" : "fail", mono_detail});
    rep.verdicts.push_back({"error_halved", ratio_ok ? "pass" : "fail", ratio_detail});
  } else {
    rep.verdicts.push_back({"error_decreasing", "skipped", "single-rung ladder"});
    rep.verdicts.push_back({"error_halved", "skipped", "single-rung ladder"});
  }
  bool quarantine_ok = true;
  std::string qd;
  for (const auto& s : rep.ladder)
    if (10 * s.failed > s.attempted) {
      quarantine_ok = false;
      qd = "n=" + std::to_string(s.n) + ": " + std::to_string(s.failed) + " failed";
    }
  rep.verdicts.push_back({"failure_rate", quarantine_ok ? "pass" : "fail", qd});

  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

namespace {

// Averaged per-design information for a non-iid rung (Cesaro average of the
// first n designs), or the shared-design information in the iid case.
Eigen::MatrixXd reference_info(const ExperimentConfig& cfg, const SdeModel& model,
                               std::size_t n, std::size_t rung,
                               std::size_t oracle_R) {
  if (cfg.design_mode == DesignMode::Iid) {
    return expected_info_mc(cfg.theta0, model, cfg.iid_design, oracle_R, cfg.dt,
                            derive_seed(cfg.seed, tag(kOracleSalt, rung, 0)), false)
        .score_outer;
  }
  const std::vector<SubjectDesign> designs = experiment_designs(cfg, n);
  const std::size_t D = chart_dim(cfg.theta0.M());
  std::vector<Eigen::MatrixXd> per(n);
  parallel_for(n, [&](std::size_t k) {
    per[k] = expected_info_mc(cfg.theta0, model, designs[k], cfg.info_replicates,
                              cfg.dt,
                              derive_seed(cfg.seed, tag(kOracleSalt, rung, k + 1)),
                              false)
                 .score_outer;
  });
  Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(D),
                                              static_cast<Eigen::Index>(D));
  for (const auto& m : per) avg += m;
  return avg / static_cast<double>(n);
}

} // namespace

ExperimentReport run_mle_normality(const ExperimentConfig& cfg) {
  const SdeModel& model = find_model(cfg.model);
  throw_on_violations(validate_experiment_config(cfg, model));
  if (cfg.estimator == Estimator::Bayes)
    throw ConfigError("/estimator", "normality experiment needs a point estimator");
  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t M = cfg.theta0.M();
  const std::size_t D = chart_dim(M);
  const Eigen::VectorXd eta0 = to_chart(cfg.theta0);

  ExperimentReport rep;
  rep.kind = "mle_normality";
  for (std::size_t j = 0; j < D; ++j) rep.value_columns.push_back("z" + std::to_string(j));
  for (std::size_t j = 0; j < D; ++j)
    rep.value_columns.push_back("covered" + std::to_string(j));

  // Oracle information at theta0: Monte Carlo with 100x the replicate budget
  // so oracle noise is second order next to replicate noise.
  const std::size_t oracle_R = 100 * cfg.replicates;

  for (std::size_t li = 0; li < cfg.ladder.size(); ++li) {
    const std::size_t n = cfg.ladder[li];
    const Eigen::MatrixXd info = reference_info(cfg, model, n, li, oracle_R);
    Eigen::LLT<Eigen::MatrixXd> info_llt(info);
    if (info_llt.info() != Eigen::Success)
      throw EstimationError(
          "reference information is singular: positive-definiteness assumption violated");
    Eigen::MatrixXd cov = info_llt.solve(
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(D),
                                  static_cast<Eigen::Index>(D)));
    cov = 0.5 * (cov + cov.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> cov_llt(cov);
    if (cov_llt.info() != Eigen::Success)
      throw EstimationError("reference covariance failed to factor");

    const std::vector<SubjectDesign> designs = experiment_designs(cfg, n);
    std::vector<ReplicateRow> rows(cfg.replicates);

    parallel_for(cfg.replicates, [&](std::size_t r) {
      ReplicateRow& row = rows[r];
      row.n = n;
      row.replicate = r;
      try {
        const CohortStats cs = simulate_cohort_stats(
            model, cfg.theta0, designs, cfg.dt,
            derive_seed(cfg.seed, tag(kSimSalt, li, r)));
        const FitResult fit =
            fit_stats(cfg, cs.stats, derive_seed(cfg.seed, tag(kFitSalt, li, r)),
                      derive_seed(cfg.seed, tag(kMcmcSalt, li, r)));
        const MixtureParams matched = match_labels(fit.theta_hat, cfg.theta0);
        const Eigen::VectorXd eta_hat = to_chart(matched);

        const Eigen::VectorXd z =
            std::sqrt(static_cast<double>(n)) *
            cov_llt.matrixL().solve(eta_hat - eta0);

        // Per-replicate Wald intervals from the fit's own observed information.
        Eigen::LLT<Eigen::MatrixXd> obs_llt(fit.observed_info);
        if (obs_llt.info() != Eigen::Success)
          throw EstimationError("observed information is not positive definite");
        const Eigen::MatrixXd sigma_n = obs_llt.solve(
            Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(D),
                                      static_cast<Eigen::Index>(D)));

        row.values.assign(z.data(), z.data() + z.size());
        for (std::size_t j = 0; j < D; ++j) {
          const double half =
              1.96 * std::sqrt(std::max(0.0, sigma_n(static_cast<Eigen::Index>(j),
                                                     static_cast<Eigen::Index>(j))));
          const bool covered =
              std::abs(eta_hat[static_cast<Eigen::Index>(j)] -
                       eta0[static_cast<Eigen::Index>(j)]) <= half;
          row.values.push_back(covered ? 1.0 : 0.0);
        }
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    });

    LadderSummary sum;
    sum.n = n;
    sum.attempted = cfg.replicates;
    sum.failed = static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(),
                      [](const ReplicateRow& r) { return !r.ok; }));
    for (std::size_t j = 0; j < D; ++j) {
      std::vector<double> zj = column(rows, j);
      sum.ks.push_back(zj.empty()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : ks_statistic(std::move(zj),
                                          [](double x) { return normal_cdf(x); }));
      const std::vector<double> cj = column(rows, D + j);
      sum.coverage.push_back(cj.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : mean(cj));
    }
    rep.ladder.push_back(std::move(sum));
    for (auto& r : rows) rep.rows.push_back(std::move(r));
  }

  // Verdicts at the largest n; the shrinkage rate needs a ladder.
  const LadderSummary& last = rep.ladder.back();
  bool ks_ok = true, cov_ok = true;
  std::string ks_detail, cov_detail;
  for (std::size_t j = 0; j < D; ++j) {
    if (!(last.ks[j] <= 0.08)) {
      ks_ok = false;
      ks_detail = "coordinate " + std::to_string(j) + ": KS " + fmt(last.ks[j]);
    }
    if (!(last.coverage[j] >= 0.91 && last.coverage[j] <= 0.985)) {
      cov_ok = false;
      cov_detail =
          "coordinate " + std::to_string(j) + ": coverage " + fmt(last.coverage[j]);
    }
  }
  rep.verdicts.push_back({"ks_within", ks_ok ? "pass" : "fail", ks_detail});
  rep.verdicts.push_back({"coverage_within", cov_ok ? "pass" : "fail", cov_detail});

  if (rep.ladder.size() >= 2) {
    bool slope_ok = true;
    std::string slope_detail;
    std::vector<double> logn;
    for (const auto& s : rep.ladder) logn.push_back(std::log(static_cast<double>(s.n)));
    for (std::size_t j = 0; j < D; ++j) {
      std::vector<double> logvar;
      for (std::size_t li = 0; li < rep.ladder.size(); ++li) {
        std::vector<double> etas;
        for (const auto& r : rep.rows)
          if (r.ok && r.n == rep.ladder[li].n)
            etas.push_back(r.values[j] / std::sqrt(static_cast<double>(r.n)));
        logvar.push_back(etas.size() < 2
                             ? std::numeric_limits<double>::quiet_NaN()
                             : std::log(variance(etas)));
      }
      const double slope = ols_slope(logn, logvar);
      if (!(std::abs(slope + 1.0) <= 0.2)) {
        slope_ok = false;
        slope_detail = "coordinate " + std::to_string(j) + ": slope " + fmt(slope);
      }
    }
    rep.verdicts.push_back(
        {"variance_shrinkage", slope_ok ? "pass" : "fail", slope_detail});
  } else {
    rep.verdicts.push_back({"variance_shrinkage", "skipped", "single-rung ladder"});
  }

  bool quarantine_ok = true;
  std::string qd;
  for (const auto& s : rep.ladder)
    if (10 * s.failed > s.attempted) {
      quarantine_ok = false;
      qd = "n=" + std::to_string(s.n) + ": " + std::to_string(s.failed) + " failed";
    }
  rep.verdicts.push_back({"failure_rate", quarantine_ok ? "pass" : "fail", qd});

  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

ExperimentReport run_posterior_asymptotics(const ExperimentConfig& cfg) {
  const SdeModel& model = find_model(cfg.model);
  throw_on_violations(validate_experiment_config(cfg, model));
  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t M = cfg.theta0.M();
  const std::size_t D = chart_dim(M);
  PriorSpec prior = cfg.prior;
  prior.box = cfg.box;

  ExperimentReport rep;
  rep.kind = "posterior";
  rep.value_columns = {"concentration", "acceptance", "identity_fallback"};
  for (std::size_t j = 0; j < D; ++j)
    rep.value_columns.push_back("ks" + std::to_string(j));

  for (std::size_t li = 0; li < cfg.ladder.size(); ++li) {
    const std::size_t n = cfg.ladder[li];
    const std::vector<SubjectDesign> designs = experiment_designs(cfg, n);
    std::vector<ReplicateRow> rows(cfg.replicates);

    parallel_for(cfg.replicates, [&](std::size_t r) {
      ReplicateRow& row = rows[r];
      row.n = n;
      row.replicate = r;
      try {
        const CohortStats cs = simulate_cohort_stats(
            model, cfg.theta0, designs, cfg.dt,
            derive_seed(cfg.seed, tag(kSimSalt, li, r)));
        const FitResult fit = multistart_fit(
            cs.stats, M, cfg.box, cfg.restarts,
            derive_seed(cfg.seed, tag(kFitSalt, li, r)));

        MhOptions mh;
        mh.iterations = cfg.mcmc_iterations;
        mh.seed = derive_seed(cfg.seed, tag(kMcmcSalt, li, r));
        mh.init = fit.theta_hat;
        const Chain chain = mh_sample(cs.stats, M, prior, mh);

        std::size_t close = 0;
        for (Eigen::Index i = static_cast<Eigen::Index>(chain.burn_in);
             i < chain.draws.rows(); ++i)
          if (permutation_distance(chain.mapped(i), cfg.theta0) < 0.5) ++close;
        const double concentration =
            static_cast<double>(close) / static_cast<double>(chain.kept());

        const NormalityReport nr =
            posterior_normality_report(chain, fit.theta_hat, fit.observed_info);

        row.values = {concentration, chain.acceptance_rate,
                      nr.identity_fallback ? 1.0 : 0.0};
        for (const auto& c : nr.coords) row.values.push_back(c.ks);
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    });

    LadderSummary sum;
    sum.n = n;
    sum.attempted = cfg.replicates;
    sum.failed = static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(),
                      [](const ReplicateRow& r) { return !r.ok; }));
    std::vector<double> conc = column(rows, 0);
    sum.median_concentration =
        conc.empty() ? std::numeric_limits<double>::quiet_NaN() : median_of(conc);
    for (std::size_t j = 0; j < D; ++j) {
      std::vector<double> ksj = column(rows, 3 + j);
      sum.median_ks.push_back(ksj.empty() ? std::numeric_limits<double>::quiet_NaN()
                                          : median_of(ksj));
    }
    rep.ladder.push_back(std::move(sum));
    for (auto& r : rows) rep.rows.push_back(std::move(r));
  }

  std::vector<double> conc_series, neg_conc;
  for (const auto& s : rep.ladder) {
    conc_series.push_back(s.median_concentration);
    neg_conc.push_back(-s.median_concentration);
  }
  rep.verdicts.push_back(decreasing_verdict("concentration_nondecreasing",
                                            neg_conc, /*strict=*/false));

  bool ks_dec_ok = true, ks_last_ok = true;
  std::string dec_detail, last_detail;
  for (std::size_t j = 0; j < D; ++j) {
    std::vector<double> series;
    for (const auto& s : rep.ladder) series.push_back(s.median_ks[j]);
    if (series.size() >= 2) {
      for (std::size_t i = 1; i < series.size(); ++i)
        if (!(series[i] < series[i - 1])) {
          ks_dec_ok = false;
          dec_detail = "coordinate " + std::to_string(j) + " rose at rung " +
                       std::to_string(i);
        }
    }
    if (!(series.back() <= 0.08)) {
      ks_last_ok = false;
      last_detail = "coordinate " + std::to_string(j) + ": KS " + fmt(series.back());
    }
  }
  if (rep.ladder.size() >= 2)
    rep.verdicts.push_back(
        {"psi_ks_decreasing", ks_dec_ok ? "pass" : "fail", dec_detail});
  else
    rep.verdicts.push_back({"psi_ks_decreasing", "skipped", "single-rung ladder"});
  rep.verdicts.push_back(
      {"psi_ks_final", ks_last_ok ? "pass" : "fail", last_detail});

  std::size_t in_window = 0, completed = 0;
  for (const auto& r : rep.rows)
    if (r.ok) {
      ++completed;
      if (r.values[1] >= 0.1 && r.values[1] <= 0.5) ++in_window;
    }
  const bool acc_ok = completed > 0 && 10 * in_window >= 9 * completed;
  rep.verdicts.push_back({"mcmc_acceptance", acc_ok ? "pass" : "fail",
                          std::to_string(in_window) + "/" +
                              std::to_string(completed) + " chains in [0.1, 0.5]"});

  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

namespace {

// Monte Carlo KL divergence of the statistic law at one design:
// E_theta0[log lambda(s; theta0) - log lambda(s; theta_alt)], fixed-block
// reduction like the information estimator.
double mc_kl(const SdeModel& model, const MixtureParams& theta0,
             const MixtureParams& theta_alt, const SubjectDesign& design,
             std::size_t R, double dt, std::uint64_t seed) {
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (R + kBlock - 1) / kBlock;
  std::vector<double> block_sums(blocks, 0.0);
  const std::vector<SubjectDesign> one{design};

  parallel_for(blocks, [&](std::size_t bi) {
    const std::size_t lo = bi * kBlock;
    const std::size_t hi = std::min(R, lo + kBlock);
    std::vector<double> vals;
    vals.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      const CohortStats cs = simulate_cohort_stats(model, theta0, one, dt,
                                                   derive_seed(seed, i));
      vals.push_back(log_lambda(cs.stats[0], theta0) -
                     log_lambda(cs.stats[0], theta_alt));
    }
    block_sums[bi] = pairwise_sum(vals);
  });
  return pairwise_sum(block_sums) / static_cast<double>(R);
}

} // namespace

ExperimentReport empirical_kl_info_limits(const ExperimentConfig& cfg) {
  const SdeModel& model = find_model(cfg.model);
  throw_on_violations(validate_experiment_config(cfg, model));
  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t D = chart_dim(cfg.theta0.M());
  const std::size_t n_max = cfg.ladder.back();

  MixtureParams alt;
  if (cfg.theta_alt) {
    alt = *cfg.theta_alt;
  } else {
    alt = cfg.theta0;
    for (auto& m : alt.means) m += 0.3;
    for (auto& w : alt.omega2) w *= 1.2;
    alt = detail::clip_into_box(alt, cfg.box);
  }

  const SubjectDesign limit_design = cfg.design_mode == DesignMode::Iid
                                         ? cfg.iid_design
                                         : SubjectDesign{cfg.noniid.x_inf,
                                                         cfg.noniid.T_inf};

  // Limit-design references, shared by every seed.
  const Eigen::MatrixXd info_inf =
      expected_info_mc(cfg.theta0, model, limit_design, cfg.limit_replicates,
                       cfg.dt, derive_seed(cfg.seed, tag(kOracleSalt, 0, 0)), false)
          .score_outer;
  const double kl_inf = mc_kl(model, cfg.theta0, alt, limit_design,
                              cfg.limit_replicates, cfg.dt,
                              derive_seed(cfg.seed, tag(kOracleSalt, 0, 1)));

  ExperimentReport rep;
  rep.kind = "kl_info_limits";
  rep.value_columns = {"info_gap", "kl_gap"};

  // Per-seed, per-design estimates; designs are shared across seeds but the
  // Monte Carlo draws are not.
  const std::vector<SubjectDesign> designs = experiment_designs(cfg, n_max);
  std::vector<Eigen::MatrixXd> info_k(cfg.replicates * n_max);
  std::vector<double> kl_k(cfg.replicates * n_max);

  parallel_for(cfg.replicates * n_max, [&](std::size_t idx) {
    const std::size_t s = idx / n_max;
    const std::size_t k = idx % n_max;
    info_k[idx] = expected_info_mc(cfg.theta0, model, designs[k],
                                   cfg.info_replicates, cfg.dt,
                                   derive_seed(cfg.seed, tag(kInfoSalt, s, k)),
                                   false)
                      .score_outer;
    kl_k[idx] = mc_kl(model, cfg.theta0, alt, designs[k], cfg.info_replicates,
                      cfg.dt, derive_seed(cfg.seed, tag(kKlSalt, s, k)));
  });

  std::vector<std::vector<double>> info_gaps(cfg.ladder.size());
  std::vector<std::vector<double>> kl_gaps(cfg.ladder.size());
  for (std::size_t s = 0; s < cfg.replicates; ++s) {
    Eigen::MatrixXd prefix_info = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D));
    double prefix_kl = 0.0;
    std::size_t li = 0;
    for (std::size_t k = 0; k < n_max && li < cfg.ladder.size(); ++k) {
      prefix_info += info_k[s * n_max + k];
      prefix_kl += kl_k[s * n_max + k];
      if (k + 1 == cfg.ladder[li]) {
        const double inv = 1.0 / static_cast<double>(k + 1);
        const double ig = (prefix_info * inv - info_inf).norm();
        const double kg = std::abs(prefix_kl * inv - kl_inf);
        info_gaps[li].push_back(ig);
        kl_gaps[li].push_back(kg);
        ReplicateRow row;
        row.n = cfg.ladder[li];
        row.replicate = s;
        row.ok = true;
        row.values = {ig, kg};
        rep.rows.push_back(std::move(row));
        ++li;
      }
    }
  }

  std::vector<double> info_series, kl_series;
  for (std::size_t li = 0; li < cfg.ladder.size(); ++li) {
    LadderSummary sum;
    sum.n = cfg.ladder[li];
    sum.attempted = cfg.replicates;
    sum.info_gap = median_of(info_gaps[li]);
    sum.kl_gap = median_of(kl_gaps[li]);
    info_series.push_back(sum.info_gap);
    kl_series.push_back(sum.kl_gap);
    rep.ladder.push_back(std::move(sum));
  }

  std::stable_sort(rep.rows.begin(), rep.rows.end(),
                   [](const ReplicateRow& a, const ReplicateRow& b) {
                     return a.n != b.n ? a.n < b.n : a.replicate < b.replicate;
                   });

  rep.verdicts.push_back(
      decreasing_verdict("info_gap_decreasing", info_series, /*strict=*/true));
  rep.verdicts.push_back(
      decreasing_verdict("kl_gap_decreasing", kl_series, /*strict=*/true));

  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

} // namespace mixfx
