#pragma once

#include <cstddef>
#include <vector>

#include "mixfx/types.hpp"

namespace mixfx {

// Component labels are not identified; the canonical representative orders
// components by mean, then variance, then weight (all ascending).
std::vector<std::size_t> canonical_order(const MixtureParams& theta);

MixtureParams apply_permutation(const MixtureParams& theta,
                                const std::vector<std::size_t>& perm);

MixtureParams canonicalize_labels(const MixtureParams& theta);

// Label-blind distance: min over permutations pi of
// max_k max(|a_k - a'_{pi(k)}|, |mu_k - mu'_{pi(k)}|, |w2_k - w2'_{pi(k)}|).
// Exactly 0 iff the two parameters coincide up to relabeling. Exhaustive over
// M! permutations (components counts here are small by construction).
double permutation_distance(const MixtureParams& a, const MixtureParams& b);

} // namespace mixfx
