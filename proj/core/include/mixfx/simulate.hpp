#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mixfx/catalogue.hpp"
#include "mixfx/rng.hpp"
#include "mixfx/types.hpp"

namespace mixfx {

// Euler-Maruyama sample path on the uniform grid t_j = T*j/N. The requested
// step is uniformized: N = ceil(T/dt_requested) (exact division respected), so
// spacing is constant and the final grid point is exactly T.
struct Path {
  std::vector<double> times;  // N+1 points, times.front()=0, times.back()=T
  std::vector<double> values; // X(t_j), values.front()=x0
  double dt = 0.0;            // effective step T/N

  std::size_t steps() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

// Number of Euler steps for horizon T and requested step dt.
std::size_t num_steps(double T, double dt_requested);

// Draw of the random effect phi ~ sum_k a_k N(mu_k, omega2_k).
struct EffectDraw {
  double phi = 0.0;
  std::size_t component = 0;
};

EffectDraw sample_random_effect(const MixtureParams& theta, RandomStream& rng);

// dX = phi b(X) dt + sigma(X) dW from design.x0 over [0, design.T].
// Throws SimulationError when |X| exceeds the divergence guard (1e8), with
// the offending step index in the message.
Path simulate_path(const SdeModel& model, double phi, const SubjectDesign& design,
                   double dt_requested, RandomStream& rng);

// Same scheme but driven by caller-supplied Brownian increments dW (one per
// step; the step count is increments.size()). Used by grid-refinement checks.
Path simulate_path_from_increments(const SdeModel& model, double phi,
                                   const SubjectDesign& design,
                                   std::span<const double> increments);

// A simulated cohort: one subject per design entry. Subject i consumes an
// independent substream derive_seed(master_seed, i) in a fixed draw order
// (component pick, phi, then path noise), so subject i's data does not depend
// on n or on scheduling.
struct Cohort {
  std::vector<SubjectDesign> designs;
  std::vector<double> phi;            // hidden truth, kept for oracles
  std::vector<std::size_t> component; // hidden component labels
  std::vector<Path> paths;
};

Cohort make_cohort(const SdeModel& model, const MixtureParams& theta,
                   const std::vector<SubjectDesign>& designs,
                   double dt_requested, std::uint64_t master_seed);

} // namespace mixfx
