#include "mixfx/suffstats.hpp"

#include <cmath>

#include "mixfx/errors.hpp"
#include "mixfx/parallel.hpp"

namespace mixfx {

SuffStats compute_suffstats(const SdeModel& model, const Path& path) {
  if (path.values.size() < 2)
    throw DegenerateStatsError("path needs at least one step to summarize");
  SuffStats s;
  s.x0 = path.values.front();
  s.T = path.times.back();

  double U = 0.0, V = 0.0;
  const std::size_t N = path.values.size() - 1;
  for (std::size_t j = 0; j < N; ++j) {
    const double x = path.values[j]; // left endpoint: Ito convention
    const double sig = model.sigma(x);
    const double g = model.b(x) / (sig * sig);
    U += g * (path.values[j + 1] - x);
    V += g * model.b(x) * (path.times[j + 1] - path.times[j]);
  }
  s.U = U;
  s.V = V;
  return s;
}

double u_stat_right_endpoint(const SdeModel& model, const Path& path) {
  if (path.values.size() < 2)
    throw DegenerateStatsError("path needs at least one step to summarize");
  double U = 0.0;
  for (std::size_t j = 0; j + 1 < path.values.size(); ++j) {
    const double xr = path.values[j + 1];
    const double sig = model.sigma(xr);
    U += model.b(xr) / (sig * sig) * (path.values[j + 1] - path.values[j]);
  }
  return U;
}

std::vector<SuffStats> cohort_suffstats(const SdeModel& model, const Cohort& cohort) {
  std::vector<SuffStats> out(cohort.paths.size());
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = compute_suffstats(model, cohort.paths[i]);
  });
  return out;
}

CohortStats simulate_cohort_stats(const SdeModel& model, const MixtureParams& theta,
                                  const std::vector<SubjectDesign>& designs,
                                  double dt_requested, std::uint64_t master_seed) {
  const std::size_t n = designs.size();
  CohortStats out;
  out.stats.resize(n);
  out.phi.resize(n);
  out.component.resize(n);

  parallel_for(n, [&](std::size_t i) {
    RandomStream rng(derive_seed(master_seed, i));
    const EffectDraw d = sample_random_effect(theta, rng);
    out.phi[i] = d.phi;
    out.component[i] = d.component;
    const Path p = simulate_path(model, d.phi, designs[i], dt_requested, rng);
    out.stats[i] = compute_suffstats(model, p);
  });
  return out;
}

} // namespace mixfx
