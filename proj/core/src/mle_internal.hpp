#pragma once

// Internal helpers shared by the estimation translation units. Not installed.

#include <span>
#include <vector>

#include "mixfx/suffstats.hpp"
#include "mixfx/types.hpp"

namespace mixfx::detail {

inline constexpr double kDegenerateV = 1e-12;

// Subjects with V below kDegenerateV carry no usable information and break
// the U/V algebra; estimation drops them and reports the count.
std::vector<SuffStats> usable_stats(std::span<const SuffStats> stats,
                                    std::size_t& excluded);

// argmax of sum_k c_k log a_k over the simplex with floor a_min (KKT/water-
// filling: a_k = max(a_min, c_k/nu) with nu fixed by the binding set).
// c_k >= 0, not all zero. This is the exact constrained weight M-step.
std::vector<double> simplex_floor_argmax(const std::vector<double>& c, double a_min);

// Force an arbitrary parameter into the closed box (weights water-filled,
// means/variances clamped). Used to sanitize initializers and mapped-back
// optimizer output; a no-op for parameters already inside.
MixtureParams clip_into_box(const MixtureParams& theta, const ParamBox& box);

} // namespace mixfx::detail
