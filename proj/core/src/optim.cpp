#include "mixfx/optim.hpp"

#include <cmath>
#include <limits>

namespace mixfx {

BfgsResult bfgs_maximize(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& gradient,
    const Eigen::VectorXd& x0, const BfgsOptions& opts) {
  const Eigen::Index D = x0.size();
  BfgsResult res;
  res.x = x0;
  res.value = objective(res.x);
  res.grad.resize(D);
  gradient(res.x, res.grad);
  res.value_trace.push_back(res.value);

  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(D, D); // inverse-Hessian approx of -f

  for (int it = 0; it < opts.max_iter; ++it) {
    if (res.grad.lpNorm<Eigen::Infinity>() <
        opts.grad_tol * std::max(1.0, std::fabs(res.value))) {
      res.converged = true;
      res.reason = "grad_tol";
      res.iterations = it;
      return res;
    }

    // ascent direction: p = Hinv * g (Hinv approximates the inverse of the
    // negative Hessian, kept positive definite by the curvature guard below)
    Eigen::VectorXd p = Hinv * res.grad;
    double slope = res.grad.dot(p);
    if (!(slope > 0.0)) { // numerical breakdown: reset to steepest ascent
      Hinv.setIdentity();
      p = res.grad;
      slope = res.grad.dot(p);
    }

    double step = 1.0;
    double f_new = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      x_new = res.x + step * p;
      bool ok = true;
      try {
        f_new = objective(x_new);
      } catch (...) {
        ok = false; // objective undefined out here; shrink
      }
      if (ok && std::isfinite(f_new) &&
          f_new >= res.value + opts.armijo_c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.reason = "line_search_failure";
      res.iterations = it;
      return res;
    }

    Eigen::VectorXd g_new(D);
    gradient(x_new, g_new);
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = res.grad - g_new; // gradient of -f increases along s
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      // standard BFGS update on the inverse approximation (minimization of -f)
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(D, D);
      Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) +
             rho * s * s.transpose();
    } // else: skip update, curvature too weak to trust

    res.x = std::move(x_new);
    res.value = f_new;
    res.grad = std::move(g_new);
    res.value_trace.push_back(res.value);
  }
  res.reason = "max_iter";
  res.iterations = opts.max_iter;
  return res;
}

} // namespace mixfx
