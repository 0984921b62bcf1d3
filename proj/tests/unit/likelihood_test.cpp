#include <doctest.h>

#include <mixfx/chart.hpp>
#include <mixfx/errors.hpp>
#include <mixfx/likelihood.hpp>
#include <mixfx/labels.hpp>
#include <mixfx/rng.hpp>
#include <mixfx/simulate.hpp>
#include <mixfx/suffstats.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "conformance.hpp"
#include "instances.hpp"

using namespace mixfx;

namespace {

SuffStats uv(double U, double V) {
  SuffStats s;
  s.U = U;
  s.V = V;
  s.T = 1.0;
  return s;
}

MixtureParams single(double mu, double w2) {
  MixtureParams t;
  t.weights = {1.0};
  t.means = {mu};
  t.omega2 = {w2};
  return t;
}

} // namespace

TEST_SUITE("likelihood") {

TEST_CASE("component density: pinned values and degenerate statistics") {
  CHECK(log_f(0.0, 1.0, 0.0, 0.0) == 0.0);
  // mu = U/V makes the quadratic term cancel, leaving U^2/2V
  CHECK(log_f(1.0, 1.0, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  // -log(2)/2 - 1/4 + 1/2
  CHECK(log_f(1.0, 1.0, 0.0, 1.0) ==
        doctest::Approx(-0.5 * std::log(2.0) + 0.25).epsilon(1e-14));

  // V = 0 is the no-information limit: admissible only with U = 0
  CHECK(log_f(0.0, 0.0, 2.0, 0.5) == 0.0);
  CHECK_THROWS_AS((void)log_f(1.0, 0.0, 2.0, 0.5), DegenerateStatsError);
}

TEST_CASE("component density is maximized over mu at U/V") {
  // With U = 0 the exponent is a pure penalty -V mu^2 / (2A); the grid
  // maximum must sit at mu = 0.
  const SuffStats s = uv(0.0, 2.0);
  double best_mu = -1e9, best = -1e300;
  for (int i = -400; i <= 400; ++i) {
    const double mu = i * 0.025;
    const double v = log_f(s.U, s.V, mu, 0.5);
    if (v > best) {
      best = v;
      best_mu = mu;
    }
  }
  CHECK(best_mu == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mixture log likelihood: collapse, pinned mixture value, exact relabeling") {
  const SuffStats s = uv(1.0, 1.0);

  // identical components collapse to a single log_f for any weights
  MixtureParams same;
  same.weights = {0.3, 0.7};
  same.means = {0.5, 0.5};
  same.omega2 = {0.8, 0.8};
  CHECK(log_lambda(s, same) ==
        doctest::Approx(log_f(1.0, 1.0, 0.5, 0.8)).epsilon(1e-14));

  // hand-assembled two-component value from the pinned component values
  MixtureParams two;
  two.weights = {0.5, 0.5};
  two.means = {1.0, 0.0};
  two.omega2 = {0.0, 1.0}; // first component is a point mass in omega2
  const double f1 = log_f(1.0, 1.0, 1.0, 0.0);
  const double f2 = log_f(1.0, 1.0, 0.0, 1.0);
  const double want = std::log(0.5 * std::exp(f1) + 0.5 * std::exp(f2));
  CHECK(log_lambda(s, two) == doctest::Approx(want).epsilon(1e-13));

  // relabeling changes nothing, bit for bit
  RandomStream rng(71);
  const ParamBox box;
  for (int rep = 0; rep < 20; ++rep) {
    const MixtureParams theta = testsupport::random_params(rng, 3, box);
    const SuffStats draw = testsupport::random_stats(rng, 0.05, 5.0);
    const double base = log_lambda(draw, theta);
    CHECK(log_lambda(draw, apply_permutation(theta, {2, 0, 1})) == base);
    CHECK(log_lambda(draw, apply_permutation(theta, {1, 2, 0})) == base);
  }
}

TEST_CASE("mixture likelihood matches adaptive quadrature of the marginal integral") {
  CHECK(testsupport::worst_quadrature_err(101, 12) < 1e-6);
}

TEST_CASE("M=1 equals the closed-form single-Gaussian expression") {
  CHECK(testsupport::worst_m1_closed_form_err(103, 40) < 1e-12);
}

TEST_CASE("responsibilities are a normalized reweighting of the components") {
  RandomStream rng(73);
  const ParamBox box;
  const MixtureParams theta = testsupport::random_params(rng, 3, box);
  const SuffStats s = testsupport::random_stats(rng, 0.1, 3.0);
  const auto r = responsibilities(s, theta);
  REQUIRE(r.size() == 3);
  CHECK(std::accumulate(r.begin(), r.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  // ratios follow a_k exp(log_f_k)
  const double l0 = std::log(theta.weights[0]) + log_f(s.U, s.V, theta.means[0], theta.omega2[0]);
  const double l1 = std::log(theta.weights[1]) + log_f(s.U, s.V, theta.means[1], theta.omega2[1]);
  CHECK(r[0] / r[1] == doctest::Approx(std::exp(l0 - l1)).epsilon(1e-10));
  CHECK(responsibilities(s, single(0.5, 0.5)) == std::vector<double>{1.0});
}

TEST_CASE("total log likelihood is additive and prefers the generating parameter") {
  RandomStream rng(79);
  const ParamBox box;
  const MixtureParams theta = testsupport::random_params(rng, 2, box);
  const SuffStats s = testsupport::random_stats(rng, 0.1, 3.0);
  const std::vector<SuffStats> one{s}, dup{s, s};
  CHECK(total_loglik(one, theta) == log_lambda(s, theta));
  CHECK(total_loglik(dup, theta) == 2.0 * log_lambda(s, theta));

  // Monte Carlo KL positivity: the likelihood at theta0 beats a mean-shifted
  // alternative on nearly every simulated cohort.
  MixtureParams theta0;
  theta0.weights = {1.0};
  theta0.means = {-0.5};
  theta0.omega2 = {0.25};
  MixtureParams shifted = theta0;
  shifted.means[0] += 2.0;
  const SdeModel& lin = find_model("linear");
  const std::vector<SubjectDesign> designs(50, SubjectDesign{0.5, 1.0});
  int wins = 0;
  for (std::uint64_t seedc = 0; seedc < 100; ++seedc) {
    const CohortStats cs = simulate_cohort_stats(lin, theta0, designs, 0.02, 1000 + seedc);
    if (total_loglik(cs.stats, theta0) > total_loglik(cs.stats, shifted)) ++wins;
  }
  CHECK(wins >= 95);
}

TEST_CASE("analytic chart derivatives match finite differences") {
  const testsupport::DerivErrors err = testsupport::worst_deriv_err(107, 5);
  CHECK(err.grad < 1e-5);
  CHECK(err.hess < 1e-4);
}

TEST_CASE("M=1 score has the textbook closed form and the Hessian is symmetric") {
  // d log lambda / d mu = V/(1+w2 V) (U/V - mu); at (U=1, V=1, mu=0, w2=1)
  // the value is 1/2. For M=1 the chart is (mu, log w2), so coordinate 0 is mu.
  const std::vector<SuffStats> stats{uv(1.0, 1.0)};
  const MixtureParams theta = single(0.0, 1.0);
  const LoglikDerivs d = loglik_derivs(stats, theta, true);
  CHECK(d.grad[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK((d.hess - d.hess.transpose()).norm() == 0.0);

  // per-subject scores assemble to the cohort gradient
  RandomStream rng(83);
  const ParamBox box;
  const MixtureParams t3 = testsupport::random_params(rng, 3, box);
  std::vector<SuffStats> many(12);
  for (auto& s : many) s = testsupport::random_stats(rng, 0.1, 3.0);
  const LoglikDerivs all = loglik_derivs(many, t3, false);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(all.grad.size());
  for (const auto& s : many) acc += subject_score(s, t3);
  CHECK((acc - all.grad).norm() < 1e-9 * std::max(1.0, all.grad.norm()));
}

} // TEST_SUITE

