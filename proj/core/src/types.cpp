#include "mixfx/types.hpp"

#include <cmath>
#include <cstdio>

namespace mixfx {

namespace {

std::string idx(const char* field, std::size_t k) {
  return std::string(field) + "/" + std::to_string(k);
}

bool finite(double x) { return std::isfinite(x); }

} // namespace

std::vector<Violation> validate_params(const MixtureParams& theta,
                                       std::size_t M,
                                       const ParamBox& box) {
  std::vector<Violation> out;
  if (M < 1) {
    out.push_back({"", "component count must be at least 1"});
    return out;
  }
  if (theta.weights.size() != M)
    out.push_back({"weights", "expected " + std::to_string(M) + " entries, got " +
                                  std::to_string(theta.weights.size())});
  if (theta.means.size() != M)
    out.push_back({"means", "expected " + std::to_string(M) + " entries, got " +
                                std::to_string(theta.means.size())});
  if (theta.omega2.size() != M)
    out.push_back({"omega2", "expected " + std::to_string(M) + " entries, got " +
                                 std::to_string(theta.omega2.size())});
  if (!out.empty()) return out;

  double sum = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    const double a = theta.weights[k];
    if (!finite(a)) {
      out.push_back({idx("weights", k), "not finite"});
      continue;
    }
    sum += a;
    if (a < box.a_min)
      out.push_back({idx("weights", k), "below weight floor a_min"});
  }
  if (finite(sum) && std::fabs(sum - 1.0) > 1e-12)
    out.push_back({"weights", "must sum to 1 within 1e-12"});

  for (std::size_t k = 0; k < M; ++k) {
    const double mu = theta.means[k];
    if (!finite(mu))
      out.push_back({idx("means", k), "not finite"});
    else if (mu < box.mu_lo || mu > box.mu_hi)
      out.push_back({idx("means", k), "outside mean box"});
  }
  for (std::size_t k = 0; k < M; ++k) {
    const double w2 = theta.omega2[k];
    if (!finite(w2))
      out.push_back({idx("omega2", k), "not finite"});
    else if (w2 < 0.0)
      out.push_back({idx("omega2", k), "negative variance"});
    else if (w2 < box.omega2_lo || w2 > box.omega2_hi)
      out.push_back({idx("omega2", k), "outside variance box"});
  }
  return out;
}

bool is_interior(const MixtureParams& theta, const ParamBox& box, double margin) {
  if (!validate_params(theta, theta.M(), box).empty()) return false;
  for (double a : theta.weights)
    if (a <= box.a_min + margin) return false;
  for (double mu : theta.means)
    if (mu <= box.mu_lo + margin || mu >= box.mu_hi - margin) return false;
  for (double w2 : theta.omega2)
    if (w2 <= box.omega2_lo + margin || w2 >= box.omega2_hi - margin) return false;
  return true;
}

std::vector<Violation> validate_box(const ParamBox& box) {
  std::vector<Violation> out;
  if (!finite(box.a_min) || box.a_min <= 0.0 || box.a_min >= 1.0)
    out.push_back({"a_min", "must lie in (0, 1)"});
  if (!finite(box.mu_lo) || !finite(box.mu_hi) || box.mu_lo >= box.mu_hi)
    out.push_back({"mu", "requires mu_lo < mu_hi"});
  if (!finite(box.omega2_lo) || box.omega2_lo <= 0.0)
    out.push_back({"omega2", "requires omega2_lo > 0"});
  if (!finite(box.omega2_hi) || box.omega2_lo >= box.omega2_hi)
    out.push_back({"omega2", "requires omega2_lo < omega2_hi"});
  return out;
}

double mixture_mean(const MixtureParams& theta) {
  double m = 0.0;
  for (std::size_t k = 0; k < theta.M(); ++k) m += theta.weights[k] * theta.means[k];
  return m;
}

double mixture_variance(const MixtureParams& theta) {
  const double m = mixture_mean(theta);
  double s = 0.0;
  for (std::size_t k = 0; k < theta.M(); ++k) {
    const double d = theta.means[k] - m;
    s += theta.weights[k] * (theta.omega2[k] + d * d);
  }
  return s;
}

} // namespace mixfx
