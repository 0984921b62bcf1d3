#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "mixfx/suffstats.hpp"
#include "mixfx/types.hpp"

namespace mixfx {

// Component log density of the statistics (U, V) under effect law N(mu, w2):
//   log f = -1/2 log A + (2 mu U - V mu^2 + w2 U^2) / (2A),  A = 1 + w2 V.
// This is the algebraically equivalent, 1/V-free form of
//   -1/2 log A - V/(2A) (mu - U/V)^2 + U^2/(2V),
// i.e. the theta-free factor exp(U^2/2V) is retained. V = 0 is admitted only
// with U = 0 (value 0, the continuous limit); V = 0 with U != 0 throws.
double log_f(double U, double V, double mu, double w2);

// First and second partials of log f with respect to (mu, w2), in the same
// 1/V-free form. All entries are finite for V >= 0, w2 >= 0.
struct LogFDerivs {
  double value = 0.0;
  double d_mu = 0.0;
  double d_w2 = 0.0;
  double d_mu_mu = 0.0;
  double d_mu_w2 = 0.0;
  double d_w2_w2 = 0.0;
};
LogFDerivs log_f_derivs(double U, double V, double mu, double w2);

// Subject mixture log likelihood: log sum_k a_k f(s | beta_k), evaluated by
// log-sum-exp with max subtraction. Terms are summed in the canonical label
// order (sort by mean, variance, weight), so relabeling theta changes nothing,
// bit for bit.
double log_lambda(const SuffStats& s, const MixtureParams& theta);

// Posterior component responsibilities r_k = a_k f_k / lambda, log-domain.
// Indexed like theta's components. Sums to 1 exactly (final renormalization).
std::vector<double> responsibilities(const SuffStats& s, const MixtureParams& theta);

// sum_i log_lambda(s_i, theta), parallel over fixed-size blocks with pairwise
// reduction in block order — byte-stable for any thread count.
double total_loglik(std::span<const SuffStats> stats, const MixtureParams& theta);

// Value, gradient, and Hessian of total_loglik in the unconstrained chart
// (z_1..z_{M-1}, mu_1..mu_M, log w2_1..log w2_M); dim 3M-1. The Hessian is
// symmetric by assembly.
struct LoglikDerivs {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};
LoglikDerivs loglik_derivs(std::span<const SuffStats> stats,
                           const MixtureParams& theta, bool with_hessian = true);

// Per-subject chart-coordinate score, and score+Hessian (information checks,
// Monte Carlo information estimates).
Eigen::VectorXd subject_score(const SuffStats& s, const MixtureParams& theta);
void subject_score_hess(const SuffStats& s, const MixtureParams& theta,
                        Eigen::VectorXd& grad, Eigen::MatrixXd& hess);

// Dominating constant for the log-ratio log f(s|beta0k) - log f(s|beta1):
// the five printed majorant terms plus the exact-identity term
// mu1^2 V / (2 (1 + w21 V)), without which the ratio is not dominated
// (take U=0, V=1, mu1 != 0, equal variances: the ratio is mu1^2/4 while every
// printed term except the 1/2 log 2 vanishes). Always >= 0.
double c1_bound(double U, double V, double mu1, double w21, double mu0, double w20);

// |log sum_k a_k f_k| <= sum_k |log f_k| for weights on the simplex and
// f_k > 0. Returns true iff the inequality holds for these inputs (it always
// must; the checker exists as a falsifiable test hook).
bool logsum_inequality_check(std::span<const double> weights,
                             std::span<const double> f);

} // namespace mixfx
