#include "mixfx/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixfx/chart.hpp"
#include "mixfx/errors.hpp"
#include "mixfx/likelihood.hpp"
#include "mixfx/mle.hpp"
#include "mixfx/parallel.hpp"
#include "mixfx/rng.hpp"
#include "mixfx/statsutil.hpp"
#include "mle_internal.hpp"

namespace mixfx {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Starting point for prior-only chains: the center of the box in chart
// coordinates (uniform weights, midpoint means, log-midpoint variances).
MixtureParams box_midpoint(std::size_t M, const ParamBox& box) {
  MixtureParams th;
  th.weights.assign(M, 1.0 / static_cast<double>(M));
  th.means.assign(M, 0.5 * (box.mu_lo + box.mu_hi));
  th.omega2.assign(M, std::exp(0.5 * (std::log(box.omega2_lo) + std::log(box.omega2_hi))));
  return th;
}

// Per-coordinate base proposal scales from the box geometry; the adapted
// global step multiplies these.
Eigen::VectorXd base_scales(std::size_t M, const ParamBox& box) {
  const std::size_t D = chart_dim(M);
  Eigen::VectorXd s(static_cast<Eigen::Index>(D));
  std::size_t j = 0;
  for (std::size_t k = 0; k + 1 < M; ++k) s[j++] = 0.3;
  for (std::size_t k = 0; k < M; ++k) s[j++] = 0.05 * (box.mu_hi - box.mu_lo);
  const double wspan = std::log(box.omega2_hi) - std::log(box.omega2_lo);
  for (std::size_t k = 0; k < M; ++k) s[j++] = 0.15 * wspan;
  return s;
}

} // namespace

double log_posterior(std::span<const SuffStats> stats, const MixtureParams& theta,
                     std::size_t M, const PriorSpec& prior) {
  if (stats.empty())
    throw EstimationError("log_posterior: needs at least one subject");
  const double lp = log_prior_density(theta, M, prior);
  if (!std::isfinite(lp)) return kNegInf;
  return lp + total_loglik(stats, theta);
}

MixtureParams Chain::mapped(Eigen::Index i) const {
  return from_chart(draws.row(i).transpose(), M);
}

Chain mh_sample(std::span<const SuffStats> stats, std::size_t M,
                const PriorSpec& prior, const MhOptions& opts) {
  if (M == 0) throw EstimationError("mh_sample: M must be positive");
  if (!opts.prior_only && stats.empty())
    throw EstimationError("mh_sample: needs data unless prior_only is set");
  if (opts.iterations < 10) throw EstimationError("mh_sample: too few iterations");
  for (const auto& v : validate_box(prior.box))
    throw ConfigError(v.path, v.message);

  const std::size_t D = chart_dim(M);
  const std::size_t burn = static_cast<std::size_t>(
      std::llround(opts.burn_fraction * static_cast<double>(opts.iterations)));

  // One strictly ordered walk: keep every inner likelihood call inline.
  SerialSection serial;

  const auto target = [&](const Eigen::VectorXd& eta) -> double {
    double lp = log_prior_chart(eta, M, prior);
    if (!std::isfinite(lp)) return kNegInf;
    if (!opts.prior_only) lp += total_loglik(stats, from_chart(eta, M));
    return lp;
  };

  MixtureParams th0;
  if (opts.init)
    th0 = detail::clip_into_box(*opts.init, prior.box);
  else if (opts.prior_only)
    th0 = box_midpoint(M, prior.box);
  else
    th0 = moment_init(stats, M, prior.box);

  // Clipping can land exactly on the support boundary, and the chart round
  // trip (omega2 -> log -> exp, weights -> logits -> softmax) can move such a
  // point by an ulp, outside the closed box where the prior has no mass.
  // Start strictly inside instead.
  {
    const ParamBox& b = prior.box;
    const double mu_margin = 1e-9 * (b.mu_hi - b.mu_lo);
    const double w2_margin = 1e-9 * (b.omega2_hi - b.omega2_lo);
    double wsum = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
      th0.means[k] =
          std::clamp(th0.means[k], b.mu_lo + mu_margin, b.mu_hi - mu_margin);
      th0.omega2[k] = std::clamp(th0.omega2[k], b.omega2_lo + w2_margin,
                                 b.omega2_hi - w2_margin);
      th0.weights[k] =
          th0.weights[k] * (1.0 - 1e-9) + 1e-9 / static_cast<double>(M);
      wsum += th0.weights[k];
    }
    for (std::size_t k = 0; k < M; ++k) th0.weights[k] /= wsum;
  }

  Eigen::VectorXd eta = to_chart(th0);
  double lt = target(eta);
  if (!std::isfinite(lt))
    throw EstimationError("mh_sample: initial state has zero posterior mass");

  Chain chain;
  chain.M = M;
  chain.burn_in = burn;
  chain.seed = opts.seed;
  chain.draws.resize(static_cast<Eigen::Index>(opts.iterations),
                     static_cast<Eigen::Index>(D));
  chain.log_post.resize(opts.iterations);

  const Eigen::VectorXd base = base_scales(M, prior.box);
  double log_step = 0.0; // shared multiplier, Robbins-Monro during burn-in

  RandomStream rs(opts.seed);
  Eigen::VectorXd prop(static_cast<Eigen::Index>(D));

  std::size_t batch_accepted = 0;
  std::size_t batch_size = 0;
  std::size_t batch_index = 0;
  std::size_t kept_accepted = 0;

  for (std::size_t t = 0; t < opts.iterations; ++t) {
    const double step = std::exp(log_step);
    for (Eigen::Index j = 0; j < prop.size(); ++j)
      prop[j] = eta[j] + step * base[j] * rs.gaussian();

    const double lt_prop = target(prop);
    const double log_u = std::log(rs.uniform_open());
    const bool accept = log_u < lt_prop - lt;
    if (accept) {
      eta = prop;
      lt = lt_prop;
    }

    chain.draws.row(static_cast<Eigen::Index>(t)) = eta.transpose();
    chain.log_post[t] = lt;

    if (t < burn) {
      batch_accepted += accept ? 1u : 0u;
      if (++batch_size == opts.adapt_batch) {
        ++batch_index;
        const double rate =
            static_cast<double>(batch_accepted) / static_cast<double>(batch_size);
        log_step += (rate - opts.target_accept) /
                    std::sqrt(static_cast<double>(batch_index));
        batch_accepted = 0;
        batch_size = 0;
      }
    } else {
      kept_accepted += accept ? 1u : 0u;
    }
  }

  const std::size_t kept = opts.iterations - burn;
  chain.acceptance_rate =
      kept > 0 ? static_cast<double>(kept_accepted) / static_cast<double>(kept) : 0.0;
  chain.acceptance_in_range =
      chain.acceptance_rate >= 0.1 && chain.acceptance_rate <= 0.5;
  chain.proposal_scale = std::exp(log_step) * base;
  return chain;
}

PsiDraws psi_transform(const Chain& chain, const MixtureParams& theta_hat,
                       const Eigen::MatrixXd& observed_info) {
  const Eigen::Index D = static_cast<Eigen::Index>(chart_dim(chain.M));
  if (observed_info.rows() != D || observed_info.cols() != D)
    throw EstimationError("psi_transform: information matrix has wrong shape");

  const Eigen::VectorXd eta_hat = to_chart(theta_hat);
  const Eigen::Index kept = static_cast<Eigen::Index>(chain.kept());

  PsiDraws out;
  out.psi = chain.draws.bottomRows(kept).rowwise() - eta_hat.transpose();

  // Sigma_n = observed_info^{-1}; whiten with its lower Cholesky factor. Any
  // factorization failure (non-PD curvature at the reference point) degrades
  // to recentred-but-unscaled draws with the fallback flag raised.
  Eigen::LLT<Eigen::MatrixXd> info_llt(observed_info);
  if (info_llt.info() != Eigen::Success) {
    out.identity_fallback = true;
    return out;
  }
  Eigen::MatrixXd sigma_n = info_llt.solve(Eigen::MatrixXd::Identity(D, D));
  sigma_n = 0.5 * (sigma_n + sigma_n.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> sn_llt(sigma_n);
  if (sn_llt.info() != Eigen::Success) {
    out.identity_fallback = true;
    return out;
  }
  out.psi = sn_llt.matrixL()
                .solve(out.psi.transpose())
                .transpose();
  return out;
}

NormalityReport posterior_normality_report(const Chain& chain,
                                           const MixtureParams& theta_hat,
                                           const Eigen::MatrixXd& observed_info,
                                           double ks_threshold,
                                           double skew_threshold,
                                           double kurtosis_threshold) {
  const PsiDraws psi = psi_transform(chain, theta_hat, observed_info);

  NormalityReport rep;
  rep.ks_threshold = ks_threshold;
  rep.skew_threshold = skew_threshold;
  rep.kurtosis_threshold = kurtosis_threshold;
  rep.identity_fallback = psi.identity_fallback;
  rep.all_pass = true;

  const auto std_normal = [](double x) { return normal_cdf(x); };
  for (Eigen::Index j = 0; j < psi.psi.cols(); ++j) {
    std::vector<double> col(psi.psi.rows());
    for (Eigen::Index i = 0; i < psi.psi.rows(); ++i) col[static_cast<std::size_t>(i)] = psi.psi(i, j);

    CoordNormality c;
    c.ks = ks_statistic(col, std_normal);
    c.skewness = skewness(col);
    c.excess_kurtosis = excess_kurtosis(col);
    c.pass = c.ks <= ks_threshold && std::abs(c.skewness) <= skew_threshold &&
             std::abs(c.excess_kurtosis) <= kurtosis_threshold;
    rep.max_ks = std::max(rep.max_ks, c.ks);
    rep.all_pass = rep.all_pass && c.pass;
    rep.coords.push_back(c);
  }
  return rep;
}

} // namespace mixfx
