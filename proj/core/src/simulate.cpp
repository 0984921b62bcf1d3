#include "mixfx/simulate.hpp"

#include <cmath>
#include <string>

#include "mixfx/errors.hpp"
#include "mixfx/parallel.hpp"

namespace mixfx {

namespace {

constexpr double kDivergenceGuard = 1e8;

void check_design(const SubjectDesign& design, double dt_requested) {
  if (!(design.T > 0.0) || !std::isfinite(design.T))
    throw SimulationError("horizon T must be positive and finite");
  if (!std::isfinite(design.x0))
    throw SimulationError("initial state x0 must be finite");
  if (!(dt_requested > 0.0) || !std::isfinite(dt_requested))
    throw SimulationError("time step dt must be positive and finite");
}

} // namespace

std::size_t num_steps(double T, double dt_requested) {
  const double ratio = T / dt_requested;
  const double rounded = std::round(ratio);
  // Exact divisions (up to parsing roundoff) keep the requested step count.
  if (std::fabs(ratio - rounded) < 1e-9 * std::max(1.0, ratio) && rounded >= 1.0)
    return static_cast<std::size_t>(rounded);
  return static_cast<std::size_t>(std::ceil(ratio));
}

EffectDraw sample_random_effect(const MixtureParams& theta, RandomStream& rng) {
  EffectDraw d;
  d.component = rng.categorical(theta.weights);
  d.phi = rng.gaussian(theta.means[d.component], std::sqrt(theta.omega2[d.component]));
  return d;
}

Path simulate_path(const SdeModel& model, double phi, const SubjectDesign& design,
                   double dt_requested, RandomStream& rng) {
  check_design(design, dt_requested);
  const std::size_t N = num_steps(design.T, dt_requested);
  const double dt = design.T / static_cast<double>(N);
  const double sqrt_dt = std::sqrt(dt);

  Path p;
  p.dt = dt;
  p.times.resize(N + 1);
  p.values.resize(N + 1);
  for (std::size_t j = 0; j <= N; ++j)
    p.times[j] = design.T * static_cast<double>(j) / static_cast<double>(N);

  double x = design.x0;
  p.values[0] = x;
  for (std::size_t j = 0; j < N; ++j) {
    x += phi * model.b(x) * dt + model.sigma(x) * sqrt_dt * rng.gaussian();
    if (!(std::fabs(x) <= kDivergenceGuard))
      throw SimulationError("path diverged (|X| > 1e8) at step " + std::to_string(j + 1));
    p.values[j + 1] = x;
  }
  return p;
}

Path simulate_path_from_increments(const SdeModel& model, double phi,
                                   const SubjectDesign& design,
                                   std::span<const double> increments) {
  const std::size_t N = increments.size();
  if (N == 0) throw SimulationError("need at least one Brownian increment");
  check_design(design, design.T / static_cast<double>(N));
  const double dt = design.T / static_cast<double>(N);

  Path p;
  p.dt = dt;
  p.times.resize(N + 1);
  p.values.resize(N + 1);
  for (std::size_t j = 0; j <= N; ++j)
    p.times[j] = design.T * static_cast<double>(j) / static_cast<double>(N);

  double x = design.x0;
  p.values[0] = x;
  for (std::size_t j = 0; j < N; ++j) {
    x += phi * model.b(x) * dt + model.sigma(x) * increments[j];
    if (!(std::fabs(x) <= kDivergenceGuard))
      throw SimulationError("path diverged (|X| > 1e8) at step " + std::to_string(j + 1));
    p.values[j + 1] = x;
  }
  return p;
}

Cohort make_cohort(const SdeModel& model, const MixtureParams& theta,
                   const std::vector<SubjectDesign>& designs,
                   double dt_requested, std::uint64_t master_seed) {
  const std::size_t n = designs.size();
  Cohort c;
  c.designs = designs;
  c.phi.resize(n);
  c.component.resize(n);
  c.paths.resize(n);

  parallel_for(n, [&](std::size_t i) {
    RandomStream rng(derive_seed(master_seed, i));
    const EffectDraw d = sample_random_effect(theta, rng);
    c.phi[i] = d.phi;
    c.component[i] = d.component;
    c.paths[i] = simulate_path(model, d.phi, designs[i], dt_requested, rng);
  });
  return c;
}

} // namespace mixfx
