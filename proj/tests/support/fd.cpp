#include "fd.hpp"

#include <cmath>

namespace testsupport {

Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x, double h) {
  const auto n = x.size();
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const ScalarFn& f, const Eigen::VectorXd& x, double h) {
  const auto n = x.size();
  Eigen::MatrixXd H(n, n);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    H(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (h * h);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += h; xpp[j] += h;
      xpm[i] += h; xpm[j] -= h;
      xmp[i] -= h; xmp[j] += h;
      xmm[i] -= h; xmm[j] -= h;
      H(i, j) = H(j, i) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h);
    }
  }
  return H;
}

double fd_third(const std::function<double(double)>& f, double x, double h) {
  const auto d3 = [&](double step) {
    return (f(x + 2.0 * step) - 2.0 * f(x + step) + 2.0 * f(x - step) -
            f(x - 2.0 * step)) /
           (2.0 * step * step * step);
  };
  const double coarse = d3(h), fine = d3(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

double rel_diff(double got, double want, double floor) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

double rel_diff(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want,
                double floor) {
  return (got - want).norm() / std::max(want.norm(), floor);
}

} // namespace testsupport
