#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixfx/prior.hpp"
#include "mixfx/suffstats.hpp"
#include "mixfx/types.hpp"

namespace mixfx {

// Unnormalized log posterior in natural coordinates: log prior plus the
// summed subject log likelihoods. -inf outside the box. Throws on empty data;
// use MhOptions::prior_only to sample the prior alone.
double log_posterior(std::span<const SuffStats> stats, const MixtureParams& theta,
                     std::size_t M, const PriorSpec& prior);

struct MhOptions {
  std::size_t iterations = 50000; // total, including burn-in
  double burn_fraction = 0.2;
  double target_accept = 0.234;
  std::size_t adapt_batch = 50;   // Robbins-Monro batch length during burn-in
  std::uint64_t seed = 1;
  bool prior_only = false;        // drop the likelihood term entirely
  std::optional<MixtureParams> init; // default: moment init (or box midpoint)
};

struct Chain {
  Eigen::MatrixXd draws;          // iterations x (3M-1), chart coordinates
  std::vector<double> log_post;   // matching unnormalized log target
  std::size_t M = 0;
  std::size_t burn_in = 0;        // rows [0, burn_in) were used for adaptation
  double acceptance_rate = 0.0;   // measured after burn-in, scales frozen
  Eigen::VectorXd proposal_scale; // final per-coordinate random-walk scales
  std::uint64_t seed = 0;
  bool acceptance_in_range = true; // post-burn-in rate within [0.1, 0.5]

  MixtureParams mapped(Eigen::Index i) const; // draw i in natural coordinates
  std::size_t kept() const { return static_cast<std::size_t>(draws.rows()) - burn_in; }
};

// Random-walk Metropolis in the unconstrained chart. Joint Gaussian proposals
// with per-coordinate scales; a shared log step size is adapted toward
// target_accept by batch Robbins-Monro during burn-in only, then frozen.
// Fully deterministic given the options.
Chain mh_sample(std::span<const SuffStats> stats, std::size_t M,
                const PriorSpec& prior, const MhOptions& opts);

// Post-burn-in draws recentred at theta_hat and whitened by the inverse
// Cholesky factor of observed_info^{-1}. If either factorization fails the
// transform degrades to the identity (recentred only) and says so.
struct PsiDraws {
  Eigen::MatrixXd psi; // kept x (3M-1)
  bool identity_fallback = false;
};

PsiDraws psi_transform(const Chain& chain, const MixtureParams& theta_hat,
                       const Eigen::MatrixXd& observed_info);

// Per-coordinate agreement of the whitened draws with a standard normal:
// Kolmogorov-Smirnov distance, skewness and excess kurtosis, each checked
// against its threshold.
struct CoordNormality {
  double ks = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  bool pass = false;
};

struct NormalityReport {
  std::vector<CoordNormality> coords;
  double ks_threshold = 0.0;
  double skew_threshold = 0.0;
  double kurtosis_threshold = 0.0;
  double max_ks = 0.0;
  bool identity_fallback = false;
  bool all_pass = false;
};

NormalityReport posterior_normality_report(const Chain& chain,
                                           const MixtureParams& theta_hat,
                                           const Eigen::MatrixXd& observed_info,
                                           double ks_threshold = 0.08,
                                           double skew_threshold = 0.5,
                                           double kurtosis_threshold = 1.0);

} // namespace mixfx
