#include "mixfx/catalogue.hpp"

#include <cmath>

#include "mixfx/errors.hpp"

namespace mixfx {

namespace {

double b_linear(double x) { return x; }
double b_constant(double) { return 1.0; }
double b_damped(double x) { return x / (1.0 + x * x); }
double sigma_one(double) { return 1.0; }

} // namespace

const std::vector<SdeModel>& catalogue() {
  static const std::vector<SdeModel> models = {
      {"linear", b_linear, sigma_one, 2.0},
      {"constant", b_constant, sigma_one, 1.0},
      {"damped", b_damped, sigma_one, 1.0},
  };
  return models;
}

const SdeModel& find_model(const std::string& name) {
  for (const auto& m : catalogue())
    if (m.name == name) return m;
  throw ConfigError("/model", "unknown model '" + name + "' (catalogue: linear, constant, damped)");
}

bool h3_grid_check(const SdeModel& model, double K, double x_lo, double x_hi, int points) {
  if (points < 2 || !(x_hi > x_lo)) return false;
  for (int i = 0; i < points; ++i) {
    const double x = x_lo + (x_hi - x_lo) * static_cast<double>(i) / (points - 1);
    const double s = model.sigma(x);
    if (s == 0.0) return false;
    const double ratio = (model.b(x) * model.b(x)) / (s * s);
    if (!(ratio <= K * (1.0 + std::pow(std::fabs(x), model.tau)) + 1e-12)) return false;
  }
  return true;
}

} // namespace mixfx
