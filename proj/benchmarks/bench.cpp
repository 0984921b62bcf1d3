// Microbenchmarks for the hot paths: component density, mixture likelihood,
// chart derivatives, EM fits, and path simulation. Data is generated once per
// benchmark outside the timed region.

#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include <mixfx/catalogue.hpp>
#include <mixfx/likelihood.hpp>
#include <mixfx/mle.hpp>
#include <mixfx/rng.hpp>
#include <mixfx/simulate.hpp>
#include <mixfx/suffstats.hpp>
#include <mixfx/types.hpp>

using namespace mixfx;

namespace {

MixtureParams params_for(std::size_t M) {
  MixtureParams theta;
  for (std::size_t k = 0; k < M; ++k) {
    theta.weights.push_back(1.0 / static_cast<double>(M));
    theta.means.push_back(-1.0 + 1.5 * static_cast<double>(k));
    theta.omega2.push_back(0.25 + 0.1 * static_cast<double>(k));
  }
  return theta;
}

std::vector<SuffStats> synthetic_stats(std::size_t n, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<SuffStats> stats(n);
  for (auto& s : stats) {
    s.V = 0.5 + 2.0 * rng.uniform_open();
    s.U = -0.5 * s.V + std::sqrt(s.V) * rng.gaussian();
    s.x0 = 0.5;
    s.T = 1.0;
  }
  return stats;
}

void BM_LogF(benchmark::State& state) {
  double u = 0.7, v = 1.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_f(u, v, -0.4, 0.3));
    u += 1e-9; // defeat loop-invariant hoisting
  }
}
BENCHMARK(BM_LogF);

void BM_LogLambda(benchmark::State& state) {
  const std::size_t M = static_cast<std::size_t>(state.range(0));
  const MixtureParams theta = params_for(M);
  const std::vector<SuffStats> stats = synthetic_stats(256, 11);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_lambda(stats[i], theta));
    i = (i + 1) & 255;
  }
}
BENCHMARK(BM_LogLambda)->Arg(1)->Arg(2)->Arg(4);

void BM_TotalLoglik(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const MixtureParams theta = params_for(2);
  const std::vector<SuffStats> stats = synthetic_stats(n, 13);
  for (auto _ : state) benchmark::DoNotOptimize(total_loglik(stats, theta));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(BM_TotalLoglik)->Arg(100)->Arg(800);

void BM_LoglikDerivs(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const MixtureParams theta = params_for(2);
  const std::vector<SuffStats> stats = synthetic_stats(n, 17);
  for (auto _ : state) {
    const LoglikDerivs d = loglik_derivs(stats, theta, /*with_hessian=*/true);
    benchmark::DoNotOptimize(d.value);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(BM_LoglikDerivs)->Arg(100)->Arg(800);

void BM_EmFit(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::vector<SuffStats> stats = synthetic_stats(n, 19);
  const ParamBox box;
  const MixtureParams init = moment_init(stats, 2, box);
  for (auto _ : state) {
    const FitResult fit = em_fit(stats, 2, box, init);
    benchmark::DoNotOptimize(fit.loglik_trace.back());
  }
}
BENCHMARK(BM_EmFit)->Arg(50)->Arg(200);

void BM_SimulatePath(benchmark::State& state) {
  const SdeModel& model = find_model("linear");
  const std::size_t steps = static_cast<std::size_t>(state.range(0));
  const double dt = 1.0 / static_cast<double>(steps);
  RandomStream rng(23);
  for (auto _ : state) {
    const Path p = simulate_path(model, -0.5, {0.5, 1.0}, dt, rng);
    benchmark::DoNotOptimize(p.values.back());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(steps));
}
BENCHMARK(BM_SimulatePath)->Arg(100)->Arg(1000);

void BM_PathSuffstats(benchmark::State& state) {
  const SdeModel& model = find_model("linear");
  RandomStream rng(29);
  const Path p = simulate_path(model, -0.5, {0.5, 1.0}, 1e-3, rng);
  for (auto _ : state) {
    const SuffStats s = compute_suffstats(model, p);
    benchmark::DoNotOptimize(s.U);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(p.steps()));
}
BENCHMARK(BM_PathSuffstats);

} // namespace

BENCHMARK_MAIN();
