#include "mixfx/chart.hpp"

#include <cmath>

#include "mixfx/errors.hpp"

namespace mixfx {

std::size_t chart_dim(std::size_t M) { return 3 * M - 1; }

Eigen::VectorXd to_chart(const MixtureParams& theta) {
  const std::size_t M = theta.M();
  if (M == 0) throw InternalError("to_chart: empty mixture");
  Eigen::VectorXd eta(chart_dim(M));

  double mean_log = 0.0;
  for (double a : theta.weights) {
    if (!(a > 0.0)) throw InternalError("to_chart: nonpositive weight");
    mean_log += std::log(a);
  }
  mean_log /= static_cast<double>(M);
  for (std::size_t k = 0; k + 1 < M; ++k)
    eta[k] = std::log(theta.weights[k]) - mean_log;

  for (std::size_t k = 0; k < M; ++k) {
    eta[M - 1 + k] = theta.means[k];
    if (!(theta.omega2[k] > 0.0)) throw InternalError("to_chart: nonpositive variance");
    eta[2 * M - 1 + k] = std::log(theta.omega2[k]);
  }
  return eta;
}

MixtureParams from_chart(const Eigen::VectorXd& eta, std::size_t M) {
  if (M == 0 || eta.size() != static_cast<Eigen::Index>(chart_dim(M)))
    throw InternalError("from_chart: dimension mismatch");
  MixtureParams theta;
  theta.weights.resize(M);
  theta.means.resize(M);
  theta.omega2.resize(M);

  // logits with l_M = -sum(z): stable softmax
  std::vector<double> logits(M, 0.0);
  double z_sum = 0.0;
  for (std::size_t k = 0; k + 1 < M; ++k) {
    logits[k] = eta[k];
    z_sum += eta[k];
  }
  logits[M - 1] = -z_sum;
  double max_l = logits[0];
  for (double l : logits) max_l = std::max(max_l, l);
  double denom = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    theta.weights[k] = std::exp(logits[k] - max_l);
    denom += theta.weights[k];
  }
  for (std::size_t k = 0; k < M; ++k) theta.weights[k] /= denom;

  for (std::size_t k = 0; k < M; ++k) {
    theta.means[k] = eta[M - 1 + k];
    theta.omega2[k] = std::exp(eta[2 * M - 1 + k]);
  }
  return theta;
}

Eigen::MatrixXd weight_jacobian(const std::vector<double>& weights) {
  const std::size_t M = weights.size();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(M, M == 0 ? 0 : M - 1);
  // l = B z with B_{ki} = delta_{ki} (k<M), B_{Mi} = -1;
  // da/dz = (diag(a) - a a^T) B, i.e. J_{k,i} = a_k (B_{ki} - a_i + a_M).
  for (std::size_t k = 0; k < M; ++k) {
    for (std::size_t i = 0; i + 1 < M; ++i) {
      const double Bki = (k == i) ? 1.0 : (k == M - 1 ? -1.0 : 0.0);
      J(k, i) = weights[k] * (Bki - weights[i] + weights[M - 1]);
    }
  }
  return J;
}

Eigen::MatrixXd weight_hessian(const std::vector<double>& weights, std::size_t k) {
  const std::size_t M = weights.size();
  if (k >= M) throw InternalError("weight_hessian: component index out of range");
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(M == 0 ? 0 : M - 1, M == 0 ? 0 : M - 1);
  if (M <= 1) return H;

  // T_{mn} = d^2 a_k / dl_m dl_n in plain softmax coordinates; contraction
  // with B gives d^2 a_k / dz_i dz_j = T_{ij} - T_{iM} - T_{Mj} + T_{MM}.
  const auto T = [&](std::size_t m, std::size_t n) {
    const double ak = weights[k], am = weights[m], an = weights[n];
    const double dkm = (k == m) ? 1.0 : 0.0;
    const double dkn = (k == n) ? 1.0 : 0.0;
    const double dmn = (m == n) ? 1.0 : 0.0;
    return ak * ((dkm - am) * (dkn - an) - am * (dmn - an));
  };
  const std::size_t last = M - 1;
  for (std::size_t i = 0; i + 1 < M; ++i)
    for (std::size_t j = 0; j + 1 < M; ++j)
      H(i, j) = T(i, j) - T(i, last) - T(last, j) + T(last, last);
  return H;
}

double weight_block_logdet(const std::vector<double>& weights) {
  const std::size_t M = weights.size();
  if (M <= 1) return 0.0;
  const Eigen::MatrixXd J = weight_jacobian(weights);
  const Eigen::MatrixXd block = J.topRows(M - 1); // rows a_1..a_{M-1}
  const double det = block.determinant();
  if (!(std::fabs(det) > 0.0))
    throw InternalError("weight_block_logdet: singular weight Jacobian");
  return std::log(std::fabs(det));
}

} // namespace mixfx
