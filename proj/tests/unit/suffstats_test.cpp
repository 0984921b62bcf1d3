#include <doctest.h>

#include <mixfx/simulate.hpp>
#include <mixfx/suffstats.hpp>

#include <cmath>
#include <vector>

using namespace mixfx;

TEST_SUITE("suffstats") {

TEST_CASE("constant model: U telescopes and V is exactly the horizon") {
  // b = sigma = 1, so U = sum (X_{j+1} - X_j) = X_T - x0 and V = sum dt = T
  // regardless of the path. Any deviation is an integration bug, not noise.
  const SdeModel& cst = find_model("constant");
  RandomStream rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const Path p = simulate_path(cst, 0.8, {0.25, 2.0}, 0.01, rng);
    const SuffStats s = compute_suffstats(cst, p);
    CHECK(s.U == doctest::Approx(p.values.back() - 0.25).epsilon(1e-10));
    CHECK(s.V == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.x0 == 0.25);
    CHECK(s.T == 2.0);
  }
}

TEST_CASE("left-point convention: the right-endpoint sum differs by the quadratic variation") {
  // For dX with unit diffusion, sum b(X_{j+1}) dX - sum b(X_j) dX applied to
  // b(x) = x equals sum (dX)^2, which concentrates at T. A wrong (right-point)
  // convention inside compute_suffstats would erase this gap.
  const SdeModel& lin = find_model("linear");
  RandomStream rng(37);
  for (int rep = 0; rep < 5; ++rep) {
    const Path p = simulate_path(lin, -0.5, {1.0, 1.0}, 0.002, rng);
    const SuffStats s = compute_suffstats(lin, p);
    const double gap = u_stat_right_endpoint(lin, p) - s.U;
    CHECK(gap == doctest::Approx(1.0).epsilon(0.25)); // [X]_T = T = 1
  }
}

TEST_CASE("damped model statistics stay finite and V is positive") {
  const SdeModel& dmp = find_model("damped");
  RandomStream rng(41);
  const Path p = simulate_path(dmp, 1.5, {0.0, 1.0}, 0.01, rng);
  const SuffStats s = compute_suffstats(dmp, p);
  CHECK(std::isfinite(s.U));
  CHECK(s.V > 0.0);
  CHECK(s.V < 1.0); // b^2 <= 1/4 for the damped drift, so V <= T/4
}

TEST_CASE("cohort statistics equal per-path statistics") {
  MixtureParams theta;
  theta.weights = {0.4, 0.6};
  theta.means = {-1.0, 2.0};
  theta.omega2 = {0.25, 0.5};
  const SdeModel& lin = find_model("linear");
  const std::vector<SubjectDesign> designs(8, SubjectDesign{0.5, 1.0});
  const Cohort cohort = make_cohort(lin, theta, designs, 0.01, 7);
  const std::vector<SuffStats> stats = cohort_suffstats(lin, cohort);
  REQUIRE(stats.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    const SuffStats direct = compute_suffstats(lin, cohort.paths[i]);
    CHECK(stats[i].U == direct.U);
    CHECK(stats[i].V == direct.V);
  }
}

TEST_CASE("fused simulate-and-summarize matches the two-step pipeline exactly") {
  MixtureParams theta;
  theta.weights = {1.0};
  theta.means = {0.5};
  theta.omega2 = {0.25};
  const SdeModel& lin = find_model("linear");
  const std::vector<SubjectDesign> designs{{0.0, 1.0}, {0.5, 2.0}, {1.0, 1.5}};
  const Cohort cohort = make_cohort(lin, theta, designs, 0.01, 1234);
  const std::vector<SuffStats> two_step = cohort_suffstats(lin, cohort);
  const CohortStats fused = simulate_cohort_stats(lin, theta, designs, 0.01, 1234);
  REQUIRE(fused.stats.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    // same substreams, same arithmetic: bit-for-bit equality
    CHECK(fused.stats[i].U == two_step[i].U);
    CHECK(fused.stats[i].V == two_step[i].V);
    CHECK(fused.phi[i] == cohort.phi[i]);
    CHECK(fused.component[i] == cohort.component[i]);
  }
}

} // TEST_SUITE

