#include "mixfx/labels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "mixfx/errors.hpp"

namespace mixfx {

std::vector<std::size_t> canonical_order(const MixtureParams& theta) {
  std::vector<std::size_t> idx(theta.M());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    return std::tie(theta.means[i], theta.omega2[i], theta.weights[i]) <
           std::tie(theta.means[j], theta.omega2[j], theta.weights[j]);
  });
  return idx;
}

MixtureParams apply_permutation(const MixtureParams& theta,
                                const std::vector<std::size_t>& perm) {
  if (perm.size() != theta.M())
    throw InternalError("apply_permutation: permutation size mismatch");
  MixtureParams out;
  out.weights.reserve(perm.size());
  out.means.reserve(perm.size());
  out.omega2.reserve(perm.size());
  for (std::size_t k : perm) {
    out.weights.push_back(theta.weights[k]);
    out.means.push_back(theta.means[k]);
    out.omega2.push_back(theta.omega2[k]);
  }
  return out;
}

MixtureParams canonicalize_labels(const MixtureParams& theta) {
  return apply_permutation(theta, canonical_order(theta));
}

double permutation_distance(const MixtureParams& a, const MixtureParams& b) {
  if (a.M() != b.M())
    throw InternalError("permutation_distance: component counts differ");
  const std::size_t M = a.M();
  std::vector<std::size_t> perm(M);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  double best = std::numeric_limits<double>::infinity();
  do {
    double d = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
      const std::size_t j = perm[k];
      d = std::max(d, std::fabs(a.weights[k] - b.weights[j]));
      d = std::max(d, std::fabs(a.means[k] - b.means[j]));
      d = std::max(d, std::fabs(a.omega2[k] - b.omega2[j]));
      if (d >= best) break; // this permutation cannot win
    }
    best = std::min(best, d);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

} // namespace mixfx
