#pragma once

#include <cstdint>
#include <vector>

#include "mixfx/catalogue.hpp"
#include "mixfx/simulate.hpp"
#include "mixfx/types.hpp"

namespace mixfx {

// Per-subject sufficient statistics of the likelihood in phi:
//   U = int b(X)/sigma^2(X) dX   (Ito sum, left endpoints)
//   V = int b^2(X)/sigma^2(X) dt (left rectangle rule)
// x0 and T are carried along so downstream CSV round-trips keep the design.
struct SuffStats {
  double U = 0.0;
  double V = 0.0;
  double x0 = 0.0;
  double T = 0.0;
};

SuffStats compute_suffstats(const SdeModel& model, const Path& path);

// Same U-sum evaluated at right endpoints. Not a statistic anyone should use;
// it exists so tests can assert the Ito (left-point) convention is in force.
double u_stat_right_endpoint(const SdeModel& model, const Path& path);

std::vector<SuffStats> cohort_suffstats(const SdeModel& model, const Cohort& cohort);

// Fused simulate-then-summarize that never retains whole paths; this is what
// the experiment drivers use so large replicate ladders stay in memory budget.
struct CohortStats {
  std::vector<SuffStats> stats;
  std::vector<double> phi;            // hidden truth for oracle checks
  std::vector<std::size_t> component; // hidden labels
};

CohortStats simulate_cohort_stats(const SdeModel& model, const MixtureParams& theta,
                                  const std::vector<SubjectDesign>& designs,
                                  double dt_requested, std::uint64_t master_seed);

} // namespace mixfx
