#pragma once

#include <Eigen/Dense>

#include "mixfx/types.hpp"

namespace mixfx {

// Priors supported on the compact box: uniform, or a product of truncated
// normals for means and variances. Mixture weights are uniform on the floored
// simplex under both kinds (a truncated normal per weight cannot respect the
// simplex constraint). Both densities are normalized in closed form, positive
// and continuous on the box.
enum class PriorKind { Uniform, TruncatedNormal };

struct PriorSpec {
  PriorKind kind = PriorKind::Uniform;
  ParamBox box;
  // hyperparameters, used by TruncatedNormal only
  double mu_mean = 0.0;
  double mu_sd = 2.0;
  double omega2_mean = 1.0;
  double omega2_sd = 2.0;
};

// log density of theta with respect to Lebesgue measure on the free
// coordinates (a_1..a_{M-1}, mu_1..mu_M, omega2_1..omega2_M), normalized over
// the box; -inf outside the box.
double log_prior_density(const MixtureParams& theta, std::size_t M,
                         const PriorSpec& prior);

// Same density expressed in the unconstrained chart: adds the exact chart
// Jacobian (weight block determinant plus sum of log omega2). -inf whenever
// the mapped parameter leaves the box.
double log_prior_chart(const Eigen::VectorXd& eta, std::size_t M,
                       const PriorSpec& prior);

} // namespace mixfx
