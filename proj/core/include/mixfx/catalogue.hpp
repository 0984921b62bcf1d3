#pragma once

#include <string>
#include <vector>

namespace mixfx {

// One-dimensional SDE model dX = phi * b(X) dt + sigma(X) dW with a fixed,
// closed catalogue of (b, sigma) pairs. `tau` is the reported polynomial
// growth exponent for b^2/sigma^2 <= K (1 + |x|^tau).
struct SdeModel {
  std::string name;
  double (*b)(double);
  double (*sigma)(double);
  double tau;
};

// The closed model catalogue:
//   linear   : b(x) = x,          sigma = 1, tau = 2
//   constant : b(x) = 1,          sigma = 1, tau = 1
//   damped   : b(x) = x/(1+x^2),  sigma = 1, tau = 1
const std::vector<SdeModel>& catalogue();

// Lookup by name; throws ConfigError (pointer "/model") for unknown names.
const SdeModel& find_model(const std::string& name);

// Numerical growth-bound check b^2(x)/sigma^2(x) <= K (1 + |x|^tau) on a grid.
// Returns true when the bound holds at every grid point.
bool h3_grid_check(const SdeModel& model, double K,
                   double x_lo = -50.0, double x_hi = 50.0, int points = 2001);

} // namespace mixfx
