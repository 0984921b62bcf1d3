#pragma once

#include <string>
#include <vector>

namespace mixfx {

// Admissible parameter region: the weight simplex with an a_min floor, and
// closed boxes for component means and random-effect variances.
struct ParamBox {
  double a_min = 0.01;
  double mu_lo = -10.0;
  double mu_hi = 10.0;
  double omega2_lo = 0.01;
  double omega2_hi = 10.0;
};

// Finite normal mixture for the random effect:
//   phi ~ sum_k weights[k] * N(means[k], omega2[k]).
struct MixtureParams {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> omega2;

  std::size_t M() const noexcept { return weights.size(); }
};

// Per-subject observation design: initial state and horizon.
struct SubjectDesign {
  double x0 = 0.0;
  double T = 1.0;
};

struct Violation {
  std::string path;    // slash-separated field path, e.g. "omega2/0"
  std::string message;
};

// Structural and box checks for a mixture parameter. Empty result = valid.
// Simplex sum tolerance is 1e-12; box bounds are closed.
std::vector<Violation> validate_params(const MixtureParams& theta,
                                       std::size_t M,
                                       const ParamBox& box);

// True when theta passes validate_params and sits strictly inside the box
// (margin in each coordinate), which is what gradient-based fitting assumes.
bool is_interior(const MixtureParams& theta, const ParamBox& box,
                 double margin = 0.0);

// Box checks for the box itself (lo < hi, a_min * M_max sane) used by config.
std::vector<Violation> validate_box(const ParamBox& box);

// Mixture moments of phi: mean = sum a_k mu_k,
// variance = sum a_k (omega2_k + mu_k^2) - mean^2.
double mixture_mean(const MixtureParams& theta);
double mixture_variance(const MixtureParams& theta);

} // namespace mixfx
