#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mixfx {

// splitmix64 step; used both as a mixer for deriving substream seeds and to
// expand a single 64-bit seed. Stable across platforms by definition.
std::uint64_t splitmix64(std::uint64_t& state);

// Derives the seed of an independent substream from a master seed and a
// stream index (subject index, replicate index, chain index, ...). Two
// splitmix64 rounds over (master, id) — collision-free in practice and
// byte-stable everywhere.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id);

// Deterministic random stream. Gaussian variates come from a hand-rolled
// Box-Muller over mt19937_64 output: std::normal_distribution is not pinned
// by the standard, and the output here must be byte-reproducible.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform();
  // Uniform on (0, 1) — never exactly 0, safe under log().
  double uniform_open();
  double uniform(double lo, double hi);

  // Standard normal (Box-Muller pair, one cached).
  double gaussian();
  double gaussian(double mean, double sd);

  // Index k with probability weights[k] (weights sum to 1).
  std::size_t categorical(const std::vector<double>& weights);

  std::uint64_t raw() { return engine_(); }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

} // namespace mixfx
