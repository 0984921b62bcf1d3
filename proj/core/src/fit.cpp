#include <algorithm>
#include <cmath>
#include <limits>

#include "mixfx/chart.hpp"
#include "mixfx/errors.hpp"
#include "mixfx/labels.hpp"
#include "mixfx/likelihood.hpp"
#include "mixfx/mle.hpp"
#include "mixfx/optim.hpp"
#include "mixfx/parallel.hpp"
#include "mixfx/rng.hpp"
#include "mixfx/statsutil.hpp"
#include "mle_internal.hpp"

namespace mixfx {

namespace {

// 1-D k-means with deterministic quantile initialization (Lloyd's updates,
// ties to the lower center index, empty clusters reseeded at the worst-fit
// point). Returns final centers and the assignment.
struct Kmeans1d {
  std::vector<double> centers;
  std::vector<std::size_t> assign;
};

Kmeans1d kmeans_1d(const std::vector<double>& xs, std::size_t K) {
  Kmeans1d km;
  km.centers.resize(K);
  km.assign.assign(xs.size(), 0);
  for (std::size_t j = 0; j < K; ++j) {
    const double p = (2.0 * static_cast<double>(j) + 1.0) / (2.0 * static_cast<double>(K));
    km.centers[j] = quantile(xs, p);
  }
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < K; ++j) {
        const double d = std::fabs(xs[i] - km.centers[j]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      if (km.assign[i] != best) {
        km.assign[i] = best;
        changed = true;
      }
    }
    std::vector<double> sum(K, 0.0);
    std::vector<std::size_t> cnt(K, 0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sum[km.assign[i]] += xs[i];
      ++cnt[km.assign[i]];
    }
    for (std::size_t j = 0; j < K; ++j) {
      if (cnt[j] == 0) {
        // reseed an empty cluster at the point farthest from its center
        std::size_t worst = 0;
        double worst_d = -1.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const double d = std::fabs(xs[i] - km.centers[km.assign[i]]);
          if (d > worst_d) {
            worst_d = d;
            worst = i;
          }
        }
        km.centers[j] = xs[worst];
        km.assign[worst] = j;
        changed = true;
      } else {
        km.centers[j] = sum[j] / static_cast<double>(cnt[j]);
      }
    }
    if (!changed) break;
  }
  return km;
}

} // namespace

MixtureParams moment_init(std::span<const SuffStats> stats, std::size_t M,
                          const ParamBox& box) {
  std::size_t excluded = 0;
  const std::vector<SuffStats> used = detail::usable_stats(stats, excluded);
  if (used.size() < M) {
    if (excluded > 0)
      throw DegenerateStatsError(
          "moment init needs at least M usable subjects; " +
          std::to_string(excluded) + " excluded for V < 1e-12");
    throw EstimationError("moment init needs at least M usable subjects");
  }

  // U/V is the per-subject effect estimate: phi_i plus N(0, 1/V_i) noise.
  std::vector<double> ratio(used.size());
  std::vector<double> inv_v(used.size());
  for (std::size_t i = 0; i < used.size(); ++i) {
    ratio[i] = used[i].U / used[i].V;
    inv_v[i] = 1.0 / used[i].V;
  }
  const Kmeans1d km = kmeans_1d(ratio, M);

  MixtureParams theta;
  theta.weights.resize(M);
  theta.means.resize(M);
  theta.omega2.resize(M);
  for (std::size_t k = 0; k < M; ++k) {
    double cnt = 0.0, mean_r = 0.0, mean_iv = 0.0;
    for (std::size_t i = 0; i < used.size(); ++i) {
      if (km.assign[i] != k) continue;
      cnt += 1.0;
      mean_r += ratio[i];
      mean_iv += inv_v[i];
    }
    if (cnt == 0.0) { // can only happen for pathological ties
      theta.weights[k] = box.a_min;
      theta.means[k] = std::clamp(km.centers[k], box.mu_lo, box.mu_hi);
      theta.omega2[k] = box.omega2_lo;
      continue;
    }
    mean_r /= cnt;
    mean_iv /= cnt;
    double var_r = 0.0;
    for (std::size_t i = 0; i < used.size(); ++i)
      if (km.assign[i] == k) var_r += (ratio[i] - mean_r) * (ratio[i] - mean_r);
    var_r /= cnt;
    theta.weights[k] = cnt / static_cast<double>(used.size());
    theta.means[k] = std::clamp(mean_r, box.mu_lo, box.mu_hi);
    // U/V has variance omega2 + 1/V around the component mean; subtract the
    // observation-noise part and floor into the box
    theta.omega2[k] = std::clamp(var_r - mean_iv, box.omega2_lo, box.omega2_hi);
  }
  return canonicalize_labels(detail::clip_into_box(theta, box));
}

FitResult direct_fit(std::span<const SuffStats> stats, std::size_t M,
                     const ParamBox& box, const MixtureParams& init,
                     const EmOptions& opts) {
  if (M < 1) throw EstimationError("component count must be at least 1");
  std::size_t excluded = 0;
  const std::vector<SuffStats> used = detail::usable_stats(stats, excluded);
  if (used.empty())
    throw DegenerateStatsError("all subjects degenerate (V < 1e-12)");
  if (used.size() < 3 * M) {
    const std::string msg = "need at least 3M usable subjects, have " +
                            std::to_string(used.size());
    if (excluded > 0) throw DegenerateStatsError(msg);
    throw EstimationError(msg);
  }

  const MixtureParams start = detail::clip_into_box(init, box);
  const Eigen::VectorXd eta0 = to_chart(start);

  const auto objective = [&](const Eigen::VectorXd& eta) {
    return total_loglik(used, from_chart(eta, M));
  };
  const auto gradient = [&](const Eigen::VectorXd& eta, Eigen::VectorXd& g) {
    g = loglik_derivs(used, from_chart(eta, M), false).grad;
  };

  BfgsOptions bopts;
  bopts.max_iter = std::max({200, static_cast<int>(chart_dim(M)) * 100, opts.max_iter});
  bopts.grad_tol = 1e-6;
  const BfgsResult bres = bfgs_maximize(objective, gradient, eta0, bopts);

  FitResult res;
  res.n = used.size();
  res.diagnostics.excluded_degenerate = excluded;
  res.theta_hat = canonicalize_labels(
      detail::clip_into_box(from_chart(bres.x, M), box));
  res.loglik_trace = bres.value_trace;
  res.converged = bres.converged;
  res.reason = bres.converged ? "tol_reached" : bres.reason;
  res.diagnostics.boundary = !is_interior(res.theta_hat, box);
  res.observed_info = -loglik_derivs(used, res.theta_hat, true).hess;
  return res;
}

FitResult multistart_fit(std::span<const SuffStats> stats, std::size_t M,
                         const ParamBox& box, int restarts, std::uint64_t seed,
                         const EmOptions& opts) {
  if (restarts < 1) throw EstimationError("multistart needs at least one restart");
  const MixtureParams base = moment_init(stats, M, box);

  FitResult best;
  bool have = false;
  for (int j = 0; j < restarts; ++j) {
    MixtureParams init = base;
    if (j > 0) {
      // chart-space jitter: scale-free for weights/variances, moderate for means
      RandomStream rng(derive_seed(seed, 0x5eed0000ULL + static_cast<std::uint64_t>(j)));
      Eigen::VectorXd eta = to_chart(base);
      for (Eigen::Index c = 0; c < eta.size(); ++c) eta[c] += 0.5 * rng.gaussian();
      init = detail::clip_into_box(from_chart(eta, M), box);
    }
    FitResult fr = em_fit(stats, M, box, init, opts);
    if (!have || fr.final_loglik() > best.final_loglik()) {
      best = std::move(fr);
      have = true;
    }
  }
  return best;
}

BicSelection bic_select(std::span<const SuffStats> stats,
                        const std::vector<std::size_t>& M_range,
                        const ParamBox& box, int restarts, std::uint64_t seed,
                        const EmOptions& opts) {
  if (M_range.empty()) throw EstimationError("bic_select: empty M range");
  std::vector<std::size_t> Ms = M_range;
  std::sort(Ms.begin(), Ms.end());
  Ms.erase(std::unique(Ms.begin(), Ms.end()), Ms.end());

  BicSelection sel;
  MixtureParams prev;
  bool have_prev = false;
  for (std::size_t mi = 0; mi < Ms.size(); ++mi) {
    const std::size_t M = Ms[mi];
    FitResult fr = multistart_fit(stats, M, box, restarts, derive_seed(seed, M), opts);

    // warm start via component split of the previous winner: guarantees the
    // fitted loglik is (numerically) nondecreasing in M for nested ranges
    if (have_prev && prev.M() + 1 == M) {
      MixtureParams split = prev;
      std::size_t j = 0;
      for (std::size_t k = 1; k < split.M(); ++k)
        if (split.weights[k] > split.weights[j]) j = k;
      const double eps = std::max(1e-3, 0.05 * std::sqrt(split.omega2[j]));
      split.weights[j] *= 0.5;
      split.weights.push_back(split.weights[j]);
      split.means.push_back(split.means[j] + eps);
      split.means[j] -= eps;
      split.omega2.push_back(split.omega2[j]);
      FitResult fs = em_fit(stats, M, box, detail::clip_into_box(split, box), opts);
      if (fs.final_loglik() > fr.final_loglik()) fr = std::move(fs);
    }

    BicRow row;
    row.M = M;
    row.loglik = fr.final_loglik();
    row.bic = -2.0 * row.loglik +
              (3.0 * static_cast<double>(M) - 1.0) *
                  std::log(static_cast<double>(fr.n));
    sel.table.push_back(row);
    sel.fits.push_back(std::move(fr));
    prev = sel.fits.back().theta_hat;
    have_prev = true;
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < sel.table.size(); ++i)
    if (sel.table[i].bic < sel.table[best].bic) best = i; // ties keep smaller M
  sel.best_M = sel.table[best].M;
  return sel;
}

InfoEstimate expected_info_mc(const MixtureParams& theta, const SdeModel& model,
                              const SubjectDesign& design, std::size_t R,
                              double dt, std::uint64_t seed, bool with_hessian) {
  if (R < 10) throw EstimationError("expected_info_mc needs R >= 10");
  const std::size_t D = chart_dim(theta.M());
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (R + kBlock - 1) / kBlock;

  struct Acc {
    Eigen::MatrixXd gg, gg2, H;
    std::size_t count = 0;
  };
  std::vector<Acc> part(blocks);

  parallel_for(blocks, [&](std::size_t b) {
    Acc acc;
    acc.gg = Eigen::MatrixXd::Zero(D, D);
    acc.gg2 = Eigen::MatrixXd::Zero(D, D);
    acc.H = Eigen::MatrixXd::Zero(D, D);
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(R, lo + kBlock);
    for (std::size_t rix = lo; rix < hi; ++rix) {
      RandomStream rng(derive_seed(seed, rix));
      const EffectDraw drw = sample_random_effect(theta, rng);
      const Path path = simulate_path(model, drw.phi, design, dt, rng);
      const SuffStats s = compute_suffstats(model, path);
      if (s.V < detail::kDegenerateV) continue; // skipped, counted by absence
      if (with_hessian) {
        subject_score_hess(s, theta, g, h);
        acc.H += h;
      } else {
        g = subject_score(s, theta);
      }
      const Eigen::MatrixXd outer = g * g.transpose();
      acc.gg += outer;
      acc.gg2 += outer.cwiseProduct(outer);
      ++acc.count;
    }
    part[b] = std::move(acc);
  });

  Eigen::MatrixXd gg = Eigen::MatrixXd::Zero(D, D);
  Eigen::MatrixXd gg2 = Eigen::MatrixXd::Zero(D, D);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(D, D);
  std::size_t count = 0;
  for (const auto& p : part) { // fixed merge order
    gg += p.gg;
    gg2 += p.gg2;
    H += p.H;
    count += p.count;
  }
  if (count == 0) throw EstimationError("expected_info_mc: every replicate degenerate");

  InfoEstimate est;
  est.R = count;
  const double nR = static_cast<double>(count);
  est.score_outer = gg / nR;
  est.mean_hessian = with_hessian ? Eigen::MatrixXd(H / nR) : Eigen::MatrixXd();
  const Eigen::MatrixXd var =
      (gg2 / nR - est.score_outer.cwiseProduct(est.score_outer)).cwiseMax(0.0);
  est.se_frobenius = std::sqrt((var / nR).sum());
  return est;
}

} // namespace mixfx
