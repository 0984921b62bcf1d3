#include "mixfx/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixfx/chart.hpp"
#include "mixfx/errors.hpp"
#include "mixfx/labels.hpp"
#include "mixfx/parallel.hpp"
#include "mixfx/statsutil.hpp"

namespace mixfx {

namespace {

void check_stats(double U, double V) {
  if (!(V >= 0.0))
    throw DegenerateStatsError("V must be nonnegative");
  if (V == 0.0 && U != 0.0)
    throw DegenerateStatsError("V = 0 with U != 0: statistics are degenerate");
}

// Scratch for one subject's mixture terms; canonical-order summation makes
// log_lambda exactly label-permutation invariant.
struct MixTerms {
  std::vector<double> log_term; // log a_k + log f_k, component order of theta
  std::vector<std::size_t> order;
  double log_lam = 0.0;

  MixTerms(const SuffStats& s, const MixtureParams& theta) {
    const std::size_t M = theta.M();
    if (M == 0) throw InternalError("mixture has no components");
    log_term.resize(M);
    for (std::size_t k = 0; k < M; ++k)
      log_term[k] = std::log(theta.weights[k]) +
                    log_f(s.U, s.V, theta.means[k], theta.omega2[k]);
    order = canonical_order(theta);
    double mx = log_term[order[0]];
    for (std::size_t k : order) mx = std::max(mx, log_term[k]);
    double acc = 0.0;
    for (std::size_t k : order) acc += std::exp(log_term[k] - mx);
    log_lam = mx + std::log(acc);
  }

  // r_k = a_k f_k / lambda in theta's component order
  std::vector<double> resp() const {
    std::vector<double> r(log_term.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < log_term.size(); ++k) {
      r[k] = std::exp(log_term[k] - log_lam);
      acc += r[k];
    }
    for (double& v : r) v /= acc; // exact unit sum
    return r;
  }
};

// Accumulator for value/score/Hessian in natural coordinates
// (a_1..a_M, mu_1..mu_M, w2_1..w2_M).
struct NatDerivs {
  double value = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd H;

  explicit NatDerivs(std::size_t M, bool with_hess)
      : g(Eigen::VectorXd::Zero(3 * M)),
        H(with_hess ? Eigen::MatrixXd::Zero(3 * M, 3 * M) : Eigen::MatrixXd()) {}

  void add_subject(const SuffStats& s, const MixtureParams& theta, bool with_hess) {
    const std::size_t M = theta.M();
    MixTerms terms(s, theta);
    value += terms.log_lam;
    const std::vector<double> r = terms.resp();

    Eigen::VectorXd gi(3 * M);
    std::vector<LogFDerivs> d(M);
    for (std::size_t k = 0; k < M; ++k) {
      d[k] = log_f_derivs(s.U, s.V, theta.means[k], theta.omega2[k]);
      gi[k] = r[k] / theta.weights[k];            // d log lam / d a_k
      gi[M + k] = r[k] * d[k].d_mu;               // d log lam / d mu_k
      gi[2 * M + k] = r[k] * d[k].d_w2;           // d log lam / d w2_k
    }
    g += gi;

    if (!with_hess) return;
    // (1/lam) d2 lam - gi gi^T; the (1/lam) d2 lam part is diagonal in the
    // component index because lam is a sum of per-component terms.
    for (std::size_t k = 0; k < M; ++k) {
      const double fa = r[k] / theta.weights[k];
      H(k, M + k) += fa * d[k].d_mu;
      H(M + k, k) += fa * d[k].d_mu;
      H(k, 2 * M + k) += fa * d[k].d_w2;
      H(2 * M + k, k) += fa * d[k].d_w2;
      H(M + k, M + k) += r[k] * (d[k].d_mu * d[k].d_mu + d[k].d_mu_mu);
      H(M + k, 2 * M + k) += r[k] * (d[k].d_mu * d[k].d_w2 + d[k].d_mu_w2);
      H(2 * M + k, M + k) += r[k] * (d[k].d_mu * d[k].d_w2 + d[k].d_mu_w2);
      H(2 * M + k, 2 * M + k) += r[k] * (d[k].d_w2 * d[k].d_w2 + d[k].d_w2_w2);
    }
    H.noalias() -= gi * gi.transpose();
  }

  void merge(const NatDerivs& other, bool with_hess) {
    value += other.value;
    g += other.g;
    if (with_hess) H += other.H;
  }
};

// Chain rule from natural coordinates into the chart (z, mu, w = log w2).
LoglikDerivs push_to_chart(const MixtureParams& theta, const NatDerivs& nat,
                           bool with_hess) {
  const std::size_t M = theta.M();
  const std::size_t D = chart_dim(M);
  const Eigen::MatrixXd Ja = weight_jacobian(theta.weights); // M x (M-1)

  LoglikDerivs out;
  out.value = nat.value;
  out.grad = Eigen::VectorXd::Zero(D);

  const auto ga = nat.g.segment(0, M);
  const auto gmu = nat.g.segment(M, M);
  const auto gw2 = nat.g.segment(2 * M, M);
  Eigen::VectorXd w2 = Eigen::Map<const Eigen::VectorXd>(theta.omega2.data(), M);

  if (M > 1) out.grad.segment(0, M - 1) = Ja.transpose() * ga;
  out.grad.segment(M - 1, M) = gmu;
  out.grad.segment(2 * M - 1, M) = gw2.cwiseProduct(w2);

  if (!with_hess) return out;

  const auto Haa = nat.H.block(0, 0, M, M);
  const auto Hamu = nat.H.block(0, M, M, M);
  const auto Haw = nat.H.block(0, 2 * M, M, M);
  const auto Hmumu = nat.H.block(M, M, M, M);
  const auto Hmuw = nat.H.block(M, 2 * M, M, M);
  const auto Hww = nat.H.block(2 * M, 2 * M, M, M);
  const Eigen::MatrixXd Dw = w2.asDiagonal();

  Eigen::MatrixXd Hc = Eigen::MatrixXd::Zero(D, D);
  if (M > 1) {
    Eigen::MatrixXd zz = Ja.transpose() * Haa * Ja;
    for (std::size_t k = 0; k < M; ++k)
      zz += ga[k] * weight_hessian(theta.weights, k);
    Hc.block(0, 0, M - 1, M - 1) = zz;
    Hc.block(0, M - 1, M - 1, M) = Ja.transpose() * Hamu;
    Hc.block(0, 2 * M - 1, M - 1, M) = Ja.transpose() * Haw * Dw;
  }
  Hc.block(M - 1, M - 1, M, M) = Hmumu;
  Hc.block(M - 1, 2 * M - 1, M, M) = Hmuw * Dw;
  Hc.block(2 * M - 1, 2 * M - 1, M, M) =
      Dw * Hww * Dw + Eigen::MatrixXd(gw2.cwiseProduct(w2).asDiagonal());

  // mirror the upper triangle: exact symmetry by construction
  out.hess = Hc.selfadjointView<Eigen::Upper>();
  return out;
}

constexpr std::size_t kReduceBlock = 256;

} // namespace

double log_f(double U, double V, double mu, double w2) {
  check_stats(U, V);
  if (!(w2 >= 0.0)) throw DegenerateStatsError("omega2 must be nonnegative");
  const double A = 1.0 + w2 * V;
  return -0.5 * std::log(A) + (2.0 * mu * U - V * mu * mu + w2 * U * U) / (2.0 * A);
}

LogFDerivs log_f_derivs(double U, double V, double mu, double w2) {
  LogFDerivs d;
  d.value = log_f(U, V, mu, w2);
  const double A = 1.0 + w2 * V;
  const double res = U - V * mu;  // = -V (mu - U/V), finite at V = 0
  d.d_mu = res / A;
  d.d_mu_mu = -V / A;
  d.d_w2 = 0.5 * (res * res / (A * A) - V / A);
  d.d_mu_w2 = -V * res / (A * A);
  d.d_w2_w2 = 0.5 * (V * V / (A * A) - 2.0 * V * res * res / (A * A * A));
  return d;
}

double log_lambda(const SuffStats& s, const MixtureParams& theta) {
  return MixTerms(s, theta).log_lam;
}

std::vector<double> responsibilities(const SuffStats& s, const MixtureParams& theta) {
  return MixTerms(s, theta).resp();
}

double total_loglik(std::span<const SuffStats> stats, const MixtureParams& theta) {
  if (stats.empty()) throw DegenerateStatsError("total_loglik: empty statistics list");
  const std::size_t n = stats.size();
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(blocks, 0.0);
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t lo = b * kReduceBlock;
    const std::size_t hi = std::min(n, lo + kReduceBlock);
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += log_lambda(stats[i], theta);
    partial[b] = acc;
  });
  return pairwise_sum(partial);
}

LoglikDerivs loglik_derivs(std::span<const SuffStats> stats,
                           const MixtureParams& theta, bool with_hessian) {
  if (stats.empty()) throw DegenerateStatsError("loglik_derivs: empty statistics list");
  const std::size_t M = theta.M();
  const std::size_t n = stats.size();
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;

  std::vector<NatDerivs> partial(blocks, NatDerivs(M, with_hessian));
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t lo = b * kReduceBlock;
    const std::size_t hi = std::min(n, lo + kReduceBlock);
    for (std::size_t i = lo; i < hi; ++i)
      partial[b].add_subject(stats[i], theta, with_hessian);
  });
  NatDerivs total(M, with_hessian);
  for (const auto& p : partial) total.merge(p, with_hessian); // fixed block order

  return push_to_chart(theta, total, with_hessian);
}

Eigen::VectorXd subject_score(const SuffStats& s, const MixtureParams& theta) {
  NatDerivs nat(theta.M(), false);
  nat.add_subject(s, theta, false);
  return push_to_chart(theta, nat, false).grad;
}

void subject_score_hess(const SuffStats& s, const MixtureParams& theta,
                        Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  NatDerivs nat(theta.M(), true);
  nat.add_subject(s, theta, true);
  LoglikDerivs d = push_to_chart(theta, nat, true);
  grad = std::move(d.grad);
  hess = std::move(d.hess);
}

double c1_bound(double U, double V, double mu1, double w21, double mu0, double w20) {
  if (!(w21 > 0.0) || !(w20 > 0.0))
    throw DegenerateStatsError("c1_bound: variances must be positive");
  const double A0 = 1.0 + w20 * V;
  const double A1 = 1.0 + w21 * V;
  const double u0 = U / A0;
  const double dw = std::fabs(w21 - w20);

  const double t_var = 0.5 * (std::log1p(w21 / w20) + dw / w21);
  const double t_u2 = 0.5 * dw * u0 * u0 * (1.0 + w20 / w21);
  const double t_mu1u = std::fabs(mu1) * std::fabs(u0) * (1.0 + dw / w21);
  const double t_mu0v = mu0 * mu0 * V / (2.0 * A0);
  const double t_mu0u = std::fabs(mu0 * u0);
  // exact-identity term: without it the ratio escapes the bound whenever
  // mu1 != 0 and U is small (see header note)
  const double t_mu1v = mu1 * mu1 * V / (2.0 * A1);

  return t_var + t_u2 + t_mu1u + t_mu0v + t_mu0u + t_mu1v;
}

bool logsum_inequality_check(std::span<const double> weights,
                             std::span<const double> f) {
  if (weights.size() != f.size() || weights.empty())
    throw InternalError("logsum_inequality_check: size mismatch");
  double rhs = 0.0;
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> lt(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!(f[k] > 0.0)) throw InternalError("logsum_inequality_check: f must be positive");
    const double lf = std::log(f[k]);
    rhs += std::fabs(lf);
    lt[k] = weights[k] > 0.0 ? std::log(weights[k]) + lf
                             : -std::numeric_limits<double>::infinity();
    mx = std::max(mx, lt[k]);
  }
  double acc = 0.0;
  for (double t : lt) acc += std::exp(t - mx);
  const double lhs = std::fabs(mx + std::log(acc));
  return lhs <= rhs + 1e-10;
}

} // namespace mixfx
