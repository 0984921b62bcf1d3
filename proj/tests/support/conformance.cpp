#include "conformance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <mixfx/chart.hpp>
#include <mixfx/likelihood.hpp>
#include <mixfx/multidim.hpp>
#include <mixfx/rng.hpp>

#include "fd.hpp"
#include "instances.hpp"
#include "quadrature.hpp"

namespace testsupport {

namespace {

const mixfx::ParamBox kBox{}; // default admissible region

// V in [0.05, 5] with U of matching scale: what unit-horizon paths produce.
constexpr double kVLo = 0.05;
constexpr double kVHi = 5.0;

} // namespace

double worst_quadrature_err(std::uint64_t seed, std::size_t count) {
  mixfx::RandomStream rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t M = 1 + i % 3;
    const mixfx::MixtureParams theta = random_params(rng, M, kBox);
    const mixfx::SuffStats s = random_stats(rng, kVLo, kVHi);
    const double got = mixfx::log_lambda(s, theta);
    const double want = log_lambda_quadrature(
        s.U, s.V, ScalarMixture{theta.weights, theta.means, theta.omega2});
    worst = std::max(worst, rel_diff(got, want));
  }
  return worst;
}

double worst_m1_closed_form_err(std::uint64_t seed, std::size_t count) {
  mixfx::RandomStream rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const mixfx::MixtureParams theta = random_params(rng, 1, kBox);
    const mixfx::SuffStats s = random_stats(rng, kVLo, kVHi);
    const double mu = theta.means[0], w2 = theta.omega2[0];
    // Textbook arrangement: the (mu - U/V)^2 quadratic form plus the V-only
    // factor, algebraically equal to the 1/V-free form the library uses.
    const double A = 1.0 + w2 * s.V;
    const double dev = mu - s.U / s.V;
    const double want =
        -0.5 * std::log(A) - s.V / (2.0 * A) * dev * dev + s.U * s.U / (2.0 * s.V);
    worst = std::max(worst, rel_diff(mixfx::log_lambda(s, theta), want));
  }
  return worst;
}

DerivErrors worst_deriv_err(std::uint64_t seed, std::size_t count) {
  mixfx::RandomStream rng(seed);
  DerivErrors out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t M = 1 + i % 3;
    const mixfx::MixtureParams theta = random_params(rng, M, kBox);
    std::vector<mixfx::SuffStats> stats(40);
    for (auto& s : stats) s = random_stats(rng, kVLo, kVHi);

    const mixfx::LoglikDerivs d = mixfx::loglik_derivs(stats, theta, true);
    const auto f = [&](const Eigen::VectorXd& eta) {
      return mixfx::total_loglik(stats, mixfx::from_chart(eta, M));
    };
    const Eigen::VectorXd eta0 = mixfx::to_chart(theta);
    const Eigen::VectorXd g_fd = fd_gradient(f, eta0, 1e-5);
    const Eigen::MatrixXd h_fd = fd_hessian(f, eta0, 1e-4);
    out.grad = std::max(out.grad, rel_diff(d.grad, g_fd));
    out.hess = std::max(out.hess, rel_diff(d.hess, h_fd));
  }
  return out;
}

double worst_multidim_quadrature_err(std::uint64_t seed, std::size_t count) {
  mixfx::RandomStream rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    // Random SPD pair (V, Sigma) with eigenvalues well inside the working
    // range, U scaled like V * (typical effect).
    Eigen::Matrix2d B, C;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        B(r, c) = rng.gaussian();
        C(r, c) = rng.gaussian();
      }
    const Eigen::Matrix2d V =
        B * B.transpose() + Eigen::Matrix2d::Identity() * rng.uniform(0.1, 1.0);
    const Eigen::Matrix2d Sigma =
        0.3 * C * C.transpose() + Eigen::Matrix2d::Identity() * rng.uniform(0.05, 0.5);
    Eigen::Vector2d m(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    Eigen::Vector2d g(rng.gaussian(), rng.gaussian());
    mixfx::VecSuffStats s;
    s.V = V;
    s.U = V * m + V.llt().matrixL() * g;
    Eigen::Vector2d mu(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));

    const double got = mixfx::log_f_multi(s, mu, Sigma);
    const double want = log_f_multi_quadrature(s.U, s.V, mu, Sigma);
    worst = std::max(worst, rel_diff(got, want));
  }
  return worst;
}

double worst_d1_equivalence_err(std::uint64_t seed, std::size_t count) {
  mixfx::RandomStream rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t M = 1 + i % 3;
    const mixfx::MixtureParams theta = random_params(rng, M, kBox);
    const mixfx::SuffStats s = random_stats(rng, kVLo, kVHi);

    mixfx::MvMixtureParams mv;
    mv.weights = theta.weights;
    for (std::size_t k = 0; k < M; ++k) {
      mv.means.push_back(Eigen::VectorXd::Constant(1, theta.means[k]));
      mv.covs.push_back(Eigen::MatrixXd::Constant(1, 1, theta.omega2[k]));
    }
    mixfx::VecSuffStats vs;
    vs.U = Eigen::VectorXd::Constant(1, s.U);
    vs.V = Eigen::MatrixXd::Constant(1, 1, s.V);

    worst = std::max(worst, rel_diff(mixfx::log_lambda_multi(vs, mv),
                                     mixfx::log_lambda(s, theta)));
  }
  return worst;
}

namespace {

// Weighted component-to-mixture ratio a_k f(s|mu,w2) / lambda(s, theta) as a
// function of the differentiation variables (mu, w2); lambda stays fixed at
// theta, exactly as the ratios arise in the quotient-rule expansion of
// d^3 log lambda. The retained exp(U^2/2V) factor cancels in the exponent.
struct RatioFn {
  double U, V, a_k, log_lam;

  double operator()(double m, double w) const {
    return a_k * std::exp(mixfx::log_f(U, V, m, w) - log_lam);
  }
  // Exact low-order derivatives via the analytic log-density partials:
  //   f' = f l',  f'' = f (l'^2 + l''),  mixed alike.
  double d_mu(double m, double w) const {
    const auto d = mixfx::log_f_derivs(U, V, m, w);
    return (*this)(m, w) * d.d_mu;
  }
  double d_w2(double m, double w) const {
    const auto d = mixfx::log_f_derivs(U, V, m, w);
    return (*this)(m, w) * d.d_w2;
  }
  double d_mu_mu(double m, double w) const {
    const auto d = mixfx::log_f_derivs(U, V, m, w);
    return (*this)(m, w) * (d.d_mu * d.d_mu + d.d_mu_mu);
  }
  double d_w2_w2(double m, double w) const {
    const auto d = mixfx::log_f_derivs(U, V, m, w);
    return (*this)(m, w) * (d.d_w2 * d.d_w2 + d.d_w2_w2);
  }
  double d_mu_w2(double m, double w) const {
    const auto d = mixfx::log_f_derivs(U, V, m, w);
    return (*this)(m, w) * (d.d_mu * d.d_w2 + d.d_mu_w2);
  }
};

// Central first difference with one Richardson step; h matches the pinned
// third-derivative step (the result is a third derivative of the ratio).
template <typename G>
double fd1_richardson(const G& g, double x, double h) {
  const auto d1 = [&](double s) { return (g(x + s) - g(x - s)) / (2.0 * s); };
  return (4.0 * d1(0.5 * h) - d1(h)) / 3.0;
}

} // namespace

BoundSuiteResult run_bound_suite(std::uint64_t seed, std::size_t ratio_draws,
                                 std::size_t logsum_draws,
                                 std::size_t deriv_draws) {
  mixfx::RandomStream rng(seed);
  BoundSuiteResult out;
  out.ratio_draws = ratio_draws;
  out.logsum_draws = logsum_draws;
  out.deriv_draws = deriv_draws;
  out.ratio_worst_slack = -std::numeric_limits<double>::infinity();
  out.deriv_worst_rel = -std::numeric_limits<double>::infinity();

  // Dominating constant for the pairwise log-density ratio.
  for (std::size_t i = 0; i < ratio_draws; ++i) {
    const mixfx::SuffStats s = random_stats(rng, kVLo, kVHi);
    const double mu1 = rng.uniform(kBox.mu_lo, kBox.mu_hi);
    const double mu0 = rng.uniform(kBox.mu_lo, kBox.mu_hi);
    const double w21 = std::exp(rng.uniform(std::log(kBox.omega2_lo), std::log(kBox.omega2_hi)));
    const double w20 = std::exp(rng.uniform(std::log(kBox.omega2_lo), std::log(kBox.omega2_hi)));
    const double lhs = mixfx::log_f(s.U, s.V, mu0, w20) - mixfx::log_f(s.U, s.V, mu1, w21);
    const double bound = mixfx::c1_bound(s.U, s.V, mu1, w21, mu0, w20);
    const double slack = (lhs - bound) / std::max(1.0, std::abs(bound));
    out.ratio_worst_slack = std::max(out.ratio_worst_slack, slack);
    if (slack > 1e-10) ++out.ratio_violations;
  }

  // Weighted log-sum inequality on synthetic positive values spanning many
  // decades (component densities vary over exactly such ranges).
  for (std::size_t i = 0; i < logsum_draws; ++i) {
    const std::size_t M = 1 + i % 4;
    std::vector<double> a(M), f(M);
    double total = 0.0;
    for (auto& w : a) total += (w = -std::log(rng.uniform_open()));
    for (auto& w : a) w /= total;
    for (auto& v : f) v = std::exp(rng.uniform(-30.0, 30.0));
    if (!mixfx::logsum_inequality_check(a, f)) ++out.logsum_violations;
  }

  // The ten derivative-ratio majorants, with E = mu_max + |U/V|. Third-order
  // ratios come from finite differences of the analytic second-order ones
  // (step 1e-3, central, one Richardson pass).
  for (std::size_t i = 0; i < deriv_draws; ++i) {
    const std::size_t M = 1 + i % 3;
    const mixfx::MixtureParams theta = random_params(rng, M, kBox);
    const mixfx::SuffStats s = random_stats(rng, kVLo, kVHi);
    const std::size_t k = i % M;

    RatioFn r{s.U, s.V, theta.weights[k], mixfx::log_lambda(s, theta)};
    const double m0 = theta.means[k], w0 = theta.omega2[k];
    double mu_max = 0.0;
    for (double mk : theta.means) mu_max = std::max(mu_max, std::abs(mk));
    const double V = s.V;
    const double E = mu_max + std::abs(s.U / V);
    const double E2 = E * E, E3 = E2 * E, E4 = E3 * E, E5 = E4 * E, E6 = E5 * E;
    const double V2 = V * V, V3 = V2 * V, V4 = V3 * V, V5 = V4 * V, V6 = V5 * V;
    const double h = 1e-3;

    const double vals[10] = {
        r(m0, w0),
        std::abs(r.d_mu(m0, w0)),
        std::abs(r.d_w2(m0, w0)),
        std::abs(r.d_mu_mu(m0, w0)),
        std::abs(r.d_w2_w2(m0, w0)),
        std::abs(r.d_mu_w2(m0, w0)),
        std::abs(fd_third([&](double m) { return r(m, w0); }, m0, h)),
        std::abs(fd1_richardson([&](double w) { return r.d_mu_mu(m0, w); }, w0, h)),
        std::abs(fd1_richardson([&](double m) { return r.d_w2_w2(m, w0); }, m0, h)),
        std::abs(fd_third([&](double w) { return r(m0, w); }, w0, h)),
    };
    const double bounds[10] = {
        1.0,
        V * E,
        V + V2 * E2,
        V + V2 * E2,
        V2 + 3.0 * V3 * E2 + V4 * E4,
        2.0 * V2 * E + V3 * E3,
        3.0 * V2 * E + V3 * E3,
        2.0 * V2 + 3.0 * V3 * E2 + V4 * E4,
        4.0 * V3 * E + 4.0 * V4 * E3 + V4 * E5,
        2.0 * V3 + 11.0 * V4 * E2 + 5.0 * V5 * E4 + V6 * E6,
    };
    bool violated = false;
    for (int b = 0; b < 10; ++b) {
      const double rel = (vals[b] - bounds[b]) / std::max(1.0, bounds[b]);
      out.deriv_worst_rel = std::max(out.deriv_worst_rel, rel);
      if (rel > 1e-2) violated = true;
    }
    if (violated) ++out.deriv_violations;
  }
  return out;
}

} // namespace testsupport
