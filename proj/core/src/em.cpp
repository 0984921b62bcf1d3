#include <algorithm>
#include <cmath>
#include <limits>

#include "mixfx/errors.hpp"
#include "mixfx/labels.hpp"
#include "mixfx/likelihood.hpp"
#include "mixfx/mle.hpp"
#include "mixfx/parallel.hpp"
#include "mixfx/statsutil.hpp"
#include "mle_internal.hpp"

namespace mixfx {

namespace detail {

std::vector<SuffStats> usable_stats(std::span<const SuffStats> stats,
                                    std::size_t& excluded) {
  std::vector<SuffStats> out;
  out.reserve(stats.size());
  excluded = 0;
  for (const auto& s : stats) {
    if (s.V < kDegenerateV)
      ++excluded;
    else
      out.push_back(s);
  }
  return out;
}

std::vector<double> simplex_floor_argmax(const std::vector<double>& c, double a_min) {
  const std::size_t M = c.size();
  if (M == 1) return {1.0};
  std::vector<bool> bound(M, false);
  std::vector<double> a(M, 0.0);
  // at most M rounds: each round binds at least one more coordinate
  for (std::size_t round = 0; round < M; ++round) {
    double free_mass = 1.0;
    double free_c = 0.0;
    std::size_t n_bound = 0;
    for (std::size_t k = 0; k < M; ++k) {
      if (bound[k]) {
        free_mass -= a_min;
        ++n_bound;
      } else {
        free_c += c[k];
      }
    }
    if (n_bound == M || free_c <= 0.0) {
      // nothing left to distribute proportionally: floor everything and
      // spread the remainder evenly over the unbound set
      const double rest = (1.0 - static_cast<double>(M) * a_min) /
                          static_cast<double>(M);
      for (std::size_t k = 0; k < M; ++k) a[k] = a_min + std::max(0.0, rest);
      double s = 0.0;
      for (double v : a) s += v;
      for (double& v : a) v /= s;
      return a;
    }
    bool new_binding = false;
    for (std::size_t k = 0; k < M; ++k) {
      if (bound[k]) {
        a[k] = a_min;
        continue;
      }
      a[k] = c[k] / free_c * free_mass;
      if (a[k] < a_min) {
        bound[k] = true;
        new_binding = true;
      }
    }
    if (!new_binding) break;
  }
  // exact unit sum (roundoff repair on the largest coordinate)
  double s = 0.0;
  for (double v : a) s += v;
  const std::size_t imax =
      static_cast<std::size_t>(std::max_element(a.begin(), a.end()) - a.begin());
  a[imax] += 1.0 - s;
  return a;
}

MixtureParams clip_into_box(const MixtureParams& theta, const ParamBox& box) {
  MixtureParams out = theta;
  for (auto& m : out.means) m = std::clamp(m, box.mu_lo, box.mu_hi);
  for (auto& w : out.omega2) w = std::clamp(w, box.omega2_lo, box.omega2_hi);
  std::vector<double> c = out.weights;
  for (auto& v : c) v = std::max(v, 0.0);
  out.weights = simplex_floor_argmax(c, box.a_min);
  return out;
}

} // namespace detail

namespace {

constexpr std::size_t kBlock = 256;

// Profile objective for the omega2 coordinate of component k at fixed mean:
// Q_k(w2) = sum_i r_ik log f(s_i | mu, w2) (the log a_k part is constant).
double profile_q(std::span<const SuffStats> stats, std::span<const double> r,
                 std::size_t k, std::size_t M, double mu, double w2) {
  double q = 0.0;
  for (std::size_t i = 0; i < stats.size(); ++i)
    q += r[i * M + k] * log_f(stats[i].U, stats[i].V, mu, w2);
  return q;
}

// One safeguarded Newton update of w2 on the profile objective, clamped to
// the box and backtracked (halving toward the current point) until the
// objective does not decrease. Returns the accepted w2.
double newton_w2_step(std::span<const SuffStats> stats, std::span<const double> r,
                      std::size_t k, std::size_t M, double mu, double w2,
                      const ParamBox& box) {
  double G = 0.0, H = 0.0;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const LogFDerivs d = log_f_derivs(stats[i].U, stats[i].V, mu, w2);
    G += r[i * M + k] * d.d_w2;
    H += r[i * M + k] * d.d_w2_w2;
  }
  double step;
  if (H < 0.0)
    step = -G / H;
  else // non-concave spot: bounded uphill probe
    step = (G >= 0.0 ? 1.0 : -1.0) * 0.25 * (box.omega2_hi - box.omega2_lo);
  double cand = std::clamp(w2 + step, box.omega2_lo, box.omega2_hi);
  if (cand == w2) return w2;

  const double q0 = profile_q(stats, r, k, M, mu, w2);
  for (int halvings = 0; halvings < 40; ++halvings) {
    if (profile_q(stats, r, k, M, mu, cand) >= q0) return cand;
    cand = w2 + 0.5 * (cand - w2);
  }
  return w2; // no improving point found on the segment
}

MixtureParams sanitize_init(const MixtureParams& init, std::size_t M,
                            const ParamBox& box) {
  if (init.weights.size() != M || init.means.size() != M || init.omega2.size() != M)
    throw EstimationError("initializer has wrong component count");
  for (double v : init.weights)
    if (!std::isfinite(v)) throw EstimationError("initializer weight not finite");
  for (double v : init.means)
    if (!std::isfinite(v)) throw EstimationError("initializer mean not finite");
  for (double v : init.omega2)
    if (!std::isfinite(v)) throw EstimationError("initializer variance not finite");
  return detail::clip_into_box(init, box);
}

} // namespace

FitResult em_fit(std::span<const SuffStats> stats, std::size_t M,
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

  const std::size_t n = used.size();
  const double bug_slack = 1e-8 * static_cast<double>(n);
  MixtureParams theta = sanitize_init(init, M, box);

  FitResult res;
  res.n = n;
  res.diagnostics.excluded_degenerate = excluded;

  double ll = total_loglik(used, theta);
  res.loglik_trace.push_back(ll);

  std::vector<double> r(n * M); // responsibilities, row-major per subject
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  // per-block partials: c_k, then mu-step numerator/denominator per k
  std::vector<double> part(blocks * 3 * M);

  for (int sweep = 0; sweep < opts.max_iter; ++sweep) {
    // E-step plus the sums every CM step needs, in one deterministic pass
    parallel_for(blocks, [&](std::size_t bidx) {
      double* p = part.data() + bidx * 3 * M;
      std::fill(p, p + 3 * M, 0.0);
      const std::size_t lo = bidx * kBlock;
      const std::size_t hi = std::min(n, lo + kBlock);
      for (std::size_t i = lo; i < hi; ++i) {
        const std::vector<double> ri = responsibilities(used[i], theta);
        for (std::size_t k = 0; k < M; ++k) {
          r[i * M + k] = ri[k];
          const double A = 1.0 + theta.omega2[k] * used[i].V;
          p[k] += ri[k];
          p[M + k] += ri[k] * used[i].U / A;
          p[2 * M + k] += ri[k] * used[i].V / A;
        }
      }
    });
    std::vector<double> c(M, 0.0), num(M, 0.0), den(M, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) { // fixed merge order
      for (std::size_t k = 0; k < M; ++k) {
        c[k] += part[b * 3 * M + k];
        num[k] += part[b * 3 * M + M + k];
        den[k] += part[b * 3 * M + 2 * M + k];
      }
    }

    // CM 1: weights — exact constrained maximizer on the floored simplex
    theta.weights = detail::simplex_floor_argmax(c, box.a_min);

    // CM 2: means — boxed maximum of the weighted quadratic at current omega2
    for (std::size_t k = 0; k < M; ++k) {
      if (den[k] > 0.0)
        theta.means[k] = std::clamp(num[k] / den[k], box.mu_lo, box.mu_hi);
      // den == 0: component owns no mass; leave its mean untouched
    }

    // CM 3: variances — safeguarded Newton on the profile, per component
    for (std::size_t k = 0; k < M; ++k)
      theta.omega2[k] =
          newton_w2_step(used, r, k, M, theta.means[k], theta.omega2[k], box);

    const double ll_new = total_loglik(used, theta);
    if (ll_new < ll - bug_slack)
      throw InternalError("EM objective decreased by " + std::to_string(ll - ll_new) +
                          " — ascent invariant broken");
    res.loglik_trace.push_back(ll_new);
    const bool done = std::fabs(ll_new - ll) < opts.tol_factor * static_cast<double>(n);
    ll = ll_new;
    if (done) {
      res.converged = true;
      res.reason = "tol_reached";
      break;
    }
  }
  if (!res.converged) res.reason = "max_iter";

  res.theta_hat = canonicalize_labels(theta);
  res.diagnostics.boundary = !is_interior(res.theta_hat, box);
  res.observed_info = -loglik_derivs(used, res.theta_hat, true).hess;
  return res;
}

} // namespace mixfx
