#pragma once

// Seeded generators for random-but-reproducible test instances: mixture
// parameter vectors inside a box and sufficient-statistic pairs with the
// signs and magnitudes the estimators actually see.

#include <mixfx/rng.hpp>
#include <mixfx/suffstats.hpp>
#include <mixfx/types.hpp>

namespace testsupport {

// Mixture with M components drawn inside `box`, margin away from the edges,
// already in canonical label order.
mixfx::MixtureParams random_params(mixfx::RandomStream& rng, std::size_t M,
                                   const mixfx::ParamBox& box);

// Sufficient statistics with V in [v_lo, v_hi] and U of matching scale
// (U ~ N(mu_typical * V, V) is what an actual path produces).
mixfx::SuffStats random_stats(mixfx::RandomStream& rng, double v_lo, double v_hi);

} // namespace testsupport
