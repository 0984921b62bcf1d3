#include "mixfx/prior.hpp"

#include <cmath>
#include <limits>

#include "mixfx/chart.hpp"
#include "mixfx/errors.hpp"
#include "mixfx/statsutil.hpp"

namespace mixfx {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_simplex_volume(std::size_t M, double a_min) {
  // Volume of {a in the simplex : a_k >= a_min} in the free coordinates
  // (a_1..a_{M-1}). Substituting a = a_min + (1 - M a_min) b maps it onto the
  // standard simplex, whose free-coordinate volume is 1/(M-1)!.
  const double slack = 1.0 - static_cast<double>(M) * a_min;
  if (slack <= 0.0) throw ConfigError("/box/a_min", "simplex floor leaves no volume");
  double out = static_cast<double>(M - 1) * std::log(slack);
  for (std::size_t k = 2; k < M; ++k) out -= std::log(static_cast<double>(k));
  return out;
}

// log density of a normal(m, s^2) truncated to [lo, hi], evaluated at x.
double log_truncnorm(double x, double m, double s, double lo, double hi) {
  const double z = (x - m) / s;
  const double mass = normal_cdf((hi - m) / s) - normal_cdf((lo - m) / s);
  if (!(mass > 0.0)) throw ConfigError("/prior", "truncated normal has no mass on the box");
  return -0.5 * z * z - 0.5 * std::log(2.0 * M_PI) - std::log(s) - std::log(mass);
}

} // namespace

double log_prior_density(const MixtureParams& theta, std::size_t M,
                         const PriorSpec& prior) {
  if (!validate_params(theta, M, prior.box).empty()) return kNegInf;

  double lp = -log_simplex_volume(M, prior.box.a_min);
  switch (prior.kind) {
    case PriorKind::Uniform: {
      const double mu_width = prior.box.mu_hi - prior.box.mu_lo;
      const double w2_width = prior.box.omega2_hi - prior.box.omega2_lo;
      lp -= static_cast<double>(M) * (std::log(mu_width) + std::log(w2_width));
      break;
    }
    case PriorKind::TruncatedNormal: {
      for (std::size_t k = 0; k < M; ++k) {
        lp += log_truncnorm(theta.means[k], prior.mu_mean, prior.mu_sd,
                            prior.box.mu_lo, prior.box.mu_hi);
        lp += log_truncnorm(theta.omega2[k], prior.omega2_mean, prior.omega2_sd,
                            prior.box.omega2_lo, prior.box.omega2_hi);
      }
      break;
    }
  }
  return lp;
}

double log_prior_chart(const Eigen::VectorXd& eta, std::size_t M,
                       const PriorSpec& prior) {
  const MixtureParams theta = from_chart(eta, M);
  const double lp = log_prior_density(theta, M, prior);
  if (!std::isfinite(lp)) return kNegInf;

  // Change of variables: weights pick up the softmax block determinant, each
  // omega2 = exp(w) contributes log omega2.
  double jac = weight_block_logdet(theta.weights);
  for (std::size_t k = 0; k < M; ++k) jac += std::log(theta.omega2[k]);
  return lp + jac;
}

} // namespace mixfx
