#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace mixfx {

// Dense BFGS maximizer with Armijo backtracking line search. Generic over the
// objective so solver behavior can be pinned down on known surfaces (e.g. a
// concave quadratic) independent of the likelihood code.
struct BfgsOptions {
  int max_iter = 400;
  double grad_tol = 1e-6;   // stop when ||g||_inf < grad_tol * max(1, |f|)
  double armijo_c1 = 1e-4;
  int max_backtracks = 60;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd grad;
  std::vector<double> value_trace; // initial value, then one per accepted step
  int iterations = 0;
  bool converged = false;
  std::string reason; // "grad_tol" | "max_iter" | "line_search_failure"
};

// objective returns f(x); gradient fills g with the gradient of f (both of
// the function being MAXIMIZED).
BfgsResult bfgs_maximize(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& gradient,
    const Eigen::VectorXd& x0, const BfgsOptions& opts = {});

} // namespace mixfx
