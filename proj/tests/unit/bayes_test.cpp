#include <doctest.h>

#include <mixfx/bayes.hpp>
#include <mixfx/chart.hpp>
#include <mixfx/errors.hpp>
#include <mixfx/likelihood.hpp>
#include <mixfx/prior.hpp>
#include <mixfx/statsutil.hpp>
#include <mixfx/suffstats.hpp>

#include <cmath>
#include <vector>

using namespace mixfx;

namespace {

std::vector<SuffStats> small_cohort(std::uint64_t seed, std::size_t n = 60) {
  MixtureParams theta0;
  theta0.weights = {1.0};
  theta0.means = {-0.5};
  theta0.omega2 = {0.25};
  const std::vector<SubjectDesign> designs(n, SubjectDesign{0.5, 1.0});
  return simulate_cohort_stats(find_model("linear"), theta0, designs, 0.01, seed).stats;
}

// Thinned post-burn-in draws of one natural coordinate.
std::vector<double> thinned_coord(const Chain& chain, int coord, std::size_t stride) {
  std::vector<double> out;
  for (std::size_t i = chain.burn_in; i < static_cast<std::size_t>(chain.draws.rows());
       i += stride) {
    const MixtureParams t = chain.mapped(static_cast<Eigen::Index>(i));
    if (coord == 0)
      out.push_back(t.weights[0]);
    else if (coord == 1)
      out.push_back(t.means[0]);
    else
      out.push_back(t.omega2[0]);
  }
  return out;
}

} // namespace

TEST_SUITE("bayes") {

TEST_CASE("log posterior composes prior and likelihood, and polices its domain") {
  const auto stats = small_cohort(3);
  PriorSpec prior;
  MixtureParams theta;
  theta.weights = {1.0};
  theta.means = {-0.4};
  theta.omega2 = {0.3};
  const double lp = log_posterior(stats, theta, 1, prior);
  CHECK(lp == doctest::Approx(log_prior_density(theta, 1, prior) +
                              total_loglik(stats, theta)).epsilon(1e-12));

  MixtureParams outside = theta;
  outside.means[0] = 11.0; // beyond the box
  CHECK(log_posterior(stats, outside, 1, prior) ==
        -std::numeric_limits<double>::infinity());

  CHECK_THROWS_AS((void)log_posterior({}, theta, 1, prior), EstimationError);
}

TEST_CASE("prior-only chains reproduce the uniform prior's marginals") {
  // The chain walks the unconstrained chart, so correct marginals in natural
  // coordinates require the exact chart Jacobian in the target: a missing
  // weight-block or log-variance term shows up as a gross KS failure here.
  PriorSpec prior; // uniform
  MhOptions opts;
  opts.iterations = 40000;
  opts.prior_only = true;
  opts.seed = 501;
  const Chain chain = mh_sample({}, 2, prior, opts);
  CHECK(chain.acceptance_in_range);

  const auto a1 = thinned_coord(chain, 0, 50);
  const auto mu1 = thinned_coord(chain, 1, 50);
  const auto w21 = thinned_coord(chain, 2, 50);
  REQUIRE(a1.size() >= 600);
  // a_1 ~ U[a_min, 1 - a_min] for M = 2 (exchangeable floored simplex)
  const double d_a = ks_statistic(a1, [](double x) { return (x - 0.01) / 0.98; });
  // mu_1 ~ U[-10, 10], omega2_1 ~ U[0.01, 10] by exchangeability
  const double d_mu = ks_statistic(mu1, [](double x) { return (x + 10.0) / 20.0; });
  const double d_w2 = ks_statistic(w21, [](double x) { return (x - 0.01) / 9.99; });
  CHECK(d_a < 0.1);
  CHECK(d_mu < 0.1);
  CHECK(d_w2 < 0.1);
}

TEST_CASE("prior-only chains reproduce truncated-normal marginals") {
  PriorSpec prior;
  prior.kind = PriorKind::TruncatedNormal;
  prior.mu_mean = 1.0;
  prior.mu_sd = 2.0;
  prior.omega2_mean = 1.0;
  prior.omega2_sd = 2.0;
  MhOptions opts;
  opts.iterations = 40000;
  opts.prior_only = true;
  opts.seed = 503;
  const Chain chain = mh_sample({}, 1, prior, opts);

  const auto mu = thinned_coord(chain, 1, 50);
  const auto tn_cdf = [&](double x) {
    const auto z = [&](double v) { return (v - prior.mu_mean) / prior.mu_sd; };
    const double lo = normal_cdf(z(-10.0)), hi = normal_cdf(z(10.0));
    return (normal_cdf(z(x)) - lo) / (hi - lo);
  };
  CHECK(ks_statistic(mu, tn_cdf) < 0.1);

  const auto w2 = thinned_coord(chain, 2, 50);
  const auto tn2_cdf = [&](double x) {
    const auto z = [&](double v) { return (v - prior.omega2_mean) / prior.omega2_sd; };
    const double lo = normal_cdf(z(0.01)), hi = normal_cdf(z(10.0));
    return (normal_cdf(z(x)) - lo) / (hi - lo);
  };
  CHECK(ks_statistic(w2, tn2_cdf) < 0.1);
}

TEST_CASE("posterior chains are deterministic and store their own target") {
  const auto stats = small_cohort(7);
  PriorSpec prior;
  MhOptions opts;
  opts.iterations = 8000;
  opts.seed = 11;
  const Chain a = mh_sample(stats, 1, prior, opts);
  const Chain b = mh_sample(stats, 1, prior, opts);
  CHECK(a.draws == b.draws); // bitwise rerun
  CHECK(a.acceptance_rate == b.acceptance_rate);
  CHECK(a.burn_in == 1600);
  CHECK(a.proposal_scale.size() == 2);

  // stored log target = chart prior + log likelihood at the mapped draw
  for (Eigen::Index i : {a.draws.rows() - 1, a.draws.rows() / 2}) {
    const Eigen::VectorXd eta = a.draws.row(i).transpose();
    const double want = log_prior_chart(eta, 1, prior) +
                        total_loglik(stats, from_chart(eta, 1));
    CHECK(a.log_post[static_cast<std::size_t>(i)] ==
          doctest::Approx(want).epsilon(1e-10));
  }

  // a far-out initial point is clipped into the box, not rejected
  MhOptions clipped = opts;
  MixtureParams far;
  far.weights = {1.0};
  far.means = {50.0};
  far.omega2 = {100.0};
  clipped.init = far;
  const Chain c = mh_sample(stats, 1, prior, clipped);
  CHECK(std::isfinite(c.log_post.front()));
}

TEST_CASE("whitening transform: exact algebra and the identity fallback") {
  // Hand-built chain: two kept rows, known information matrix.
  Chain chain;
  chain.M = 1;
  chain.burn_in = 1;
  chain.draws.resize(3, 2);
  chain.draws << 0.0, 0.0, // burn-in row, must be ignored
      1.3, -0.4, 0.9, 0.2;
  MixtureParams hat;
  hat.weights = {1.0};
  hat.means = {1.0};
  hat.omega2 = {std::exp(0.0)};
  // eta_hat = (1, 0); Sigma_n = info^{-1}; whitener L: L L^T = Sigma_n
  Eigen::MatrixXd info(2, 2);
  info << 4.0, 1.0, 1.0, 2.0;
  const PsiDraws psi = psi_transform(chain, hat, info);
  CHECK_FALSE(psi.identity_fallback);
  REQUIRE(psi.psi.rows() == 2);
  const Eigen::MatrixXd L =
      Eigen::MatrixXd(info.inverse().llt().matrixL());
  for (int r = 0; r < 2; ++r) {
    Eigen::Vector2d eta = chain.draws.row(r + 1).transpose();
    Eigen::Vector2d want = L.triangularView<Eigen::Lower>().solve(
        eta - Eigen::Vector2d(1.0, 0.0));
    CHECK((psi.psi.row(r).transpose() - want).norm() < 1e-12);
  }

  // a singular information matrix cannot be whitened: recentre only, say so
  const PsiDraws fallback = psi_transform(chain, hat, Eigen::MatrixXd::Zero(2, 2));
  CHECK(fallback.identity_fallback);
  CHECK(fallback.psi(0, 0) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("normality report passes exact Gaussian draws and flags heavy tails") {
  // Build draws that are exactly N(eta_hat, info^{-1}): psi becomes the raw
  // standard normals, so the report must pass. Heavy-tailed contamination in
  // one coordinate must trip that coordinate's kurtosis check.
  RandomStream rng(4242);
  const std::size_t S = 4000;
  Eigen::MatrixXd info(2, 2);
  info << 2.0, 0.3, 0.3, 1.0;
  const Eigen::MatrixXd L = Eigen::MatrixXd(info.inverse().llt().matrixL());
  MixtureParams hat;
  hat.weights = {1.0};
  hat.means = {0.5};
  hat.omega2 = {std::exp(-0.2)};
  const Eigen::Vector2d eta_hat(0.5, -0.2);

  Chain chain;
  chain.M = 1;
  chain.burn_in = 0;
  chain.draws.resize(S, 2);
  Eigen::MatrixXd z(S, 2);
  for (std::size_t i = 0; i < S; ++i) {
    z(i, 0) = rng.gaussian();
    z(i, 1) = rng.gaussian();
    chain.draws.row(i) = (eta_hat + L * z.row(i).transpose()).transpose();
  }
  const NormalityReport good = posterior_normality_report(chain, hat, info);
  CHECK(good.all_pass);
  CHECK(good.max_ks < 0.08);
  REQUIRE(good.coords.size() == 2);

  // contaminate coordinate 0 with scaled-up draws: excess kurtosis explodes
  Chain heavy = chain;
  for (std::size_t i = 0; i < S; i += 10)
    heavy.draws(i, 0) = eta_hat[0] + 6.0 * (heavy.draws(i, 0) - eta_hat[0]);
  const NormalityReport bad = posterior_normality_report(heavy, hat, info);
  CHECK_FALSE(bad.all_pass);
  CHECK_FALSE(bad.coords[0].pass);
}

} // TEST_SUITE

