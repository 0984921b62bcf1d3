#pragma once

#include <Eigen/Dense>

#include "mixfx/types.hpp"

namespace mixfx {

// Unconstrained coordinates for a mixture with M components:
//   eta = (z_1..z_{M-1}, mu_1..mu_M, w_1..w_M),  dim 3M-1
// with centered softmax weights (logits l_k = z_k for k < M and
// l_M = -sum z, so sum of logits is 0) and w_k = log omega2_k.
// The map is a bijection onto the open simplex x R^M x (0,inf)^M and the
// round trip is numerically tight (the inverse re-centers log weights).
std::size_t chart_dim(std::size_t M);

Eigen::VectorXd to_chart(const MixtureParams& theta);
MixtureParams from_chart(const Eigen::VectorXd& eta, std::size_t M);

// d a / d z as an M x (M-1) matrix for the centered-softmax parameterization.
Eigen::MatrixXd weight_jacobian(const std::vector<double>& weights);

// d^2 a_k / dz dz' as an (M-1) x (M-1) matrix.
Eigen::MatrixXd weight_hessian(const std::vector<double>& weights, std::size_t k);

// log |det d(a_1..a_{M-1}) / d(z_1..z_{M-1})| — the weight block of the chart
// Jacobian, needed when mapping densities on the simplex into the chart.
// Returns 0 for M = 1 (empty block).
double weight_block_logdet(const std::vector<double>& weights);

} // namespace mixfx
