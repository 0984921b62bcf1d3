#include "mixfx/multidim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixfx/errors.hpp"
#include "mixfx/statsutil.hpp"

namespace mixfx {

namespace {

void check_stats(const VecSuffStats& s) {
  const Eigen::Index d = s.d();
  if (d == 0 || s.V.rows() != d || s.V.cols() != d)
    throw DegenerateStatsError("vector statistics have inconsistent dimensions");
  const double asym = (s.V - s.V.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10)
    throw DegenerateStatsError("V is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.V);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 1e-10)
    throw DegenerateStatsError("V is not positive definite");
}

// Lexicographic order on (mean, covariance upper triangle, weight): the
// vector-valued analogue of the scalar canonical label order.
std::vector<std::size_t> mv_canonical_order(const MvMixtureParams& theta) {
  const std::size_t M = theta.M();
  std::vector<std::size_t> order(M);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Eigen::Index d = theta.means[a].size();
    for (Eigen::Index i = 0; i < d; ++i) {
      if (theta.means[a][i] != theta.means[b][i])
        return theta.means[a][i] < theta.means[b][i];
    }
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i; j < d; ++j) {
        if (theta.covs[a](i, j) != theta.covs[b](i, j))
          return theta.covs[a](i, j) < theta.covs[b](i, j);
      }
    return theta.weights[a] < theta.weights[b];
  });
  return order;
}

} // namespace

std::vector<Violation> validate_mv_params(const MvMixtureParams& theta,
                                          std::size_t M, Eigen::Index d,
                                          const ParamBox& box) {
  std::vector<Violation> out;
  const auto bad = [&](std::string path, std::string msg) {
    out.push_back({std::move(path), std::move(msg)});
  };

  if (theta.M() != M || theta.means.size() != M || theta.covs.size() != M) {
    bad("", "component count mismatch");
    return out;
  }
  double wsum = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    const std::string ks = std::to_string(k);
    if (!std::isfinite(theta.weights[k]) || theta.weights[k] < box.a_min)
      bad("weights/" + ks, "below simplex floor");
    wsum += theta.weights[k];
    if (theta.means[k].size() != d) {
      bad("means/" + ks, "wrong dimension");
      continue;
    }
    for (Eigen::Index i = 0; i < d; ++i)
      if (!(theta.means[k][i] >= box.mu_lo && theta.means[k][i] <= box.mu_hi))
        bad("means/" + ks, "outside box");
    if (theta.covs[k].rows() != d || theta.covs[k].cols() != d) {
      bad("covs/" + ks, "wrong dimension");
      continue;
    }
    if ((theta.covs[k] - theta.covs[k].transpose()).cwiseAbs().maxCoeff() > 1e-10) {
      bad("covs/" + ks, "not symmetric");
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(theta.covs[k]);
    if (eig.info() != Eigen::Success ||
        eig.eigenvalues().minCoeff() < box.omega2_lo ||
        eig.eigenvalues().maxCoeff() > box.omega2_hi)
      bad("covs/" + ks, "eigenvalues outside box");
  }
  if (std::abs(wsum - 1.0) > 1e-12) bad("weights", "does not sum to 1");
  return out;
}

double log_f_multi(const VecSuffStats& s, const Eigen::VectorXd& mu,
                   const Eigen::MatrixXd& Sigma, bool* asymmetry_flag) {
  check_stats(s);
  const Eigen::Index d = s.d();
  if (mu.size() != d || Sigma.rows() != d || Sigma.cols() != d)
    throw DegenerateStatsError("effect-law dimensions do not match the statistics");

  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(d, d) + s.V * Sigma;

  // Condition check on I + V Sigma before trusting the solve. d is small here
  // (evaluation-only module), so an SVD is cheap and exact.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || smax / smin > 1e12)
    throw EstimationError("I + V*Sigma is near-singular");

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  // det(I + V Sigma) = det(I + Sigma V) > 0: eigenvalues of V Sigma match
  // those of the PSD matrix V^{1/2} Sigma V^{1/2}.
  const double logdet = lu.matrixLU().diagonal().cwiseAbs().array().log().sum();

  Eigen::MatrixXd Rinv = lu.solve(s.V); // (I + V Sigma)^{-1} V
  const double asym = (Rinv - Rinv.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry_flag) *asymmetry_flag = asym > 1e-8;
  Rinv = 0.5 * (Rinv + Rinv.transpose()).eval();

  const Eigen::LLT<Eigen::MatrixXd> vllt(s.V);
  if (vllt.info() != Eigen::Success)
    throw DegenerateStatsError("V is not positive definite");
  const Eigen::VectorXd vinv_u = vllt.solve(s.U);
  const Eigen::VectorXd m = mu - vinv_u;

  return -0.5 * logdet - 0.5 * m.dot(Rinv * m) + 0.5 * s.U.dot(vinv_u);
}

double log_lambda_multi(const VecSuffStats& s, const MvMixtureParams& theta) {
  const std::size_t M = theta.M();
  if (M == 0) throw InternalError("mixture has no components");

  const std::vector<std::size_t> order = mv_canonical_order(theta);
  std::vector<double> terms(M);
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < M; ++r) {
    const std::size_t k = order[r];
    terms[r] = std::log(theta.weights[k]) +
               log_f_multi(s, theta.means[k], theta.covs[k]);
    hi = std::max(hi, terms[r]);
  }
  double acc = 0.0;
  for (std::size_t r = 0; r < M; ++r) acc += std::exp(terms[r] - hi);
  return hi + std::log(acc);
}

const std::vector<MvSdeModel>& mv_catalogue() {
  static const std::vector<MvSdeModel> models = [] {
    std::vector<MvSdeModel> v;
    v.push_back({"linear2", 2,
                 [](double x) { return Eigen::Vector2d(x, 1.0); },
                 [](double) { return 1.0; }});
    v.push_back({"ones2", 2,
                 [](double) { return Eigen::Vector2d(1.0, 1.0); },
                 [](double) { return 1.0; }});
    return v;
  }();
  return models;
}

const MvSdeModel& find_mv_model(const std::string& name) {
  for (const auto& m : mv_catalogue())
    if (m.name == name) return m;
  throw ConfigError("/model", "unknown multidimensional model '" + name + "'");
}

Eigen::VectorXd sample_effect_multi(const MvMixtureParams& theta, RandomStream& rs) {
  const std::size_t k = rs.categorical(theta.weights);
  const Eigen::Index d = theta.means[k].size();
  const Eigen::LLT<Eigen::MatrixXd> llt(theta.covs[k]);
  if (llt.info() != Eigen::Success)
    throw SimulationError("effect covariance is not positive definite");
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = rs.gaussian();
  return theta.means[k] + llt.matrixL() * z;
}

MvSimResult simulate_multi(const MvSdeModel& model, const Eigen::VectorXd& phi,
                           const SubjectDesign& design, double dt,
                           RandomStream& rs) {
  if (phi.size() != model.d)
    throw SimulationError("effect dimension does not match the model");

  const std::size_t N = num_steps(design.T, dt);
  const double h = design.T / static_cast<double>(N);
  const double sqrt_h = std::sqrt(h);

  MvSimResult out;
  out.path.dt = h;
  out.path.times.resize(N + 1);
  out.path.values.resize(N + 1);
  out.stats.U = Eigen::VectorXd::Zero(model.d);
  out.stats.V = Eigen::MatrixXd::Zero(model.d, model.d);

  double x = design.x0;
  out.path.times[0] = 0.0;
  out.path.values[0] = x;

  for (std::size_t j = 0; j < N; ++j) {
    const Eigen::VectorXd b = model.b(x);
    const double sig = model.sigma(x);
    const double s2 = sig * sig;
    const double dW = sqrt_h * rs.gaussian();
    const double x_next = x + phi.dot(b) * h + sig * dW;
    if (!(std::abs(x_next) <= 1e8))
      throw SimulationError("path diverged at step " + std::to_string(j + 1));

    const double dX = x_next - x;
    out.stats.U += (dX / s2) * b;               // left-point rule
    out.stats.V += (h / s2) * (b * b.transpose());

    x = x_next;
    out.path.times[j + 1] = design.T * static_cast<double>(j + 1) / static_cast<double>(N);
    out.path.values[j + 1] = x;
  }
  out.stats.V = 0.5 * (out.stats.V + out.stats.V.transpose()).eval();
  return out;
}

} // namespace mixfx
