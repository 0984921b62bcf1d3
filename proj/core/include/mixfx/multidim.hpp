#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixfx/rng.hpp"
#include "mixfx/simulate.hpp"
#include "mixfx/types.hpp"

namespace mixfx {

// d-dimensional analogue of the scalar statistics: U = int b/sigma^2 dX,
// V = int b b^T / sigma^2 ds. V must be symmetric and positive definite for
// likelihood evaluation (min eigenvalue above 1e-10).
struct VecSuffStats {
  Eigen::VectorXd U;
  Eigen::MatrixXd V;

  Eigen::Index d() const { return U.size(); }
};

// Mixture of d-variate normals for the random effect vector.
struct MvMixtureParams {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs; // symmetric PSD

  std::size_t M() const noexcept { return weights.size(); }
  Eigen::Index d() const { return means.empty() ? 0 : means.front().size(); }
};

// Structural checks: simplex weights with floor, consistent dimensions,
// symmetric covariances with eigenvalues inside the variance box, means
// inside the mean box.
std::vector<Violation> validate_mv_params(const MvMixtureParams& theta,
                                          std::size_t M, Eigen::Index d,
                                          const ParamBox& box);

// Component log density of (U, V) under effect law N(mu, Sigma):
//   -1/2 log det(I + V Sigma) - 1/2 (mu - V^{-1}U)^T Rinv (mu - V^{-1}U)
//   + 1/2 U^T V^{-1} U,     Rinv = (I + V Sigma)^{-1} V.
// Rinv is symmetric in exact arithmetic (push-through identity); it is
// symmetrized before the quadratic form, and *asymmetry_flag is set when the
// numerical asymmetry exceeds 1e-8. Throws on non-PD V and on
// cond(I + V Sigma) > 1e12.
double log_f_multi(const VecSuffStats& s, const Eigen::VectorXd& mu,
                   const Eigen::MatrixXd& Sigma, bool* asymmetry_flag = nullptr);

// Mixture version: log sum_k a_k f_k by log-sum-exp, components visited in a
// canonical order (lexicographic in mean, covariance, weight) so relabeling
// cannot change the value.
double log_lambda_multi(const VecSuffStats& s, const MvMixtureParams& theta);

// Scalar diffusion with a d-dimensional effect: dX = phi^T b(X) dt + sigma dW.
struct MvSdeModel {
  std::string name;
  Eigen::Index d = 0;
  std::function<Eigen::VectorXd(double)> b;
  std::function<double(double)> sigma;
};

// Shipped designs: "linear2" has b(x) = (x, 1)^T, "ones2" has b(x) = (1, 1)^T,
// both with unit sigma.
const std::vector<MvSdeModel>& mv_catalogue();
const MvSdeModel& find_mv_model(const std::string& name);

Eigen::VectorXd sample_effect_multi(const MvMixtureParams& theta, RandomStream& rs);

struct MvSimResult {
  Path path;
  VecSuffStats stats;
};

// Euler path plus left-point statistics on the uniform grid; V is symmetrized
// on return. Same divergence guard as the scalar simulator.
MvSimResult simulate_multi(const MvSdeModel& model, const Eigen::VectorXd& phi,
                           const SubjectDesign& design, double dt,
                           RandomStream& rs);

} // namespace mixfx
