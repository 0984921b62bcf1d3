#include "mixfx/statsutil.hpp"

#include <algorithm>
#include <cmath>

#include "mixfx/errors.hpp"

namespace mixfx {

namespace {

double pairwise_sum_range(const double* xs, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += xs[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_range(xs, half) + pairwise_sum_range(xs + half, n - half);
}

double central_moment(std::span<const double> xs, int order, double m) {
  std::vector<double> terms(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    terms[i] = std::pow(xs[i] - m, order);
  return pairwise_sum(terms) / static_cast<double>(xs.size());
}

} // namespace

double pairwise_sum(std::span<const double> xs) {
  return pairwise_sum_range(xs.data(), xs.size());
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InternalError("mean: empty sample");
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw InternalError("variance: need at least 2 points");
  const double m = mean(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - m;
    sq[i] = d * d;
  }
  return pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
}

double sample_sd(std::span<const double> xs) { return std::sqrt(variance(xs)); }

double skewness(std::span<const double> xs) {
  if (xs.size() < 3) throw InternalError("skewness: need at least 3 points");
  const double m = mean(xs);
  const double m2 = central_moment(xs, 2, m);
  const double m3 = central_moment(xs, 3, m);
  return m3 / std::pow(m2, 1.5);
}

double excess_kurtosis(std::span<const double> xs) {
  if (xs.size() < 4) throw InternalError("kurtosis: need at least 4 points");
  const double m = mean(xs);
  const double m2 = central_moment(xs, 2, m);
  const double m4 = central_moment(xs, 4, m);
  return m4 / (m2 * m2) - 3.0;
}

double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw InternalError("quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  if (p <= 0.0) return xs.front();
  if (p >= 1.0) return xs.back();
  const double pos = p * static_cast<double>(xs.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InternalError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    const double d_plus = (static_cast<double>(i) + 1.0) / n - F;
    const double d_minus = F - static_cast<double>(i) / n;
    d = std::max({d, d_plus, d_minus});
  }
  return d;
}

double ks_pvalue(double d_stat, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d_stat;
  if (lambda < 1e-9) return 1.0;
  // Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> sample,
                 const std::function<double(double)>& cdf) {
  KsResult r;
  const std::size_t n = sample.size();
  r.statistic = ks_statistic(std::move(sample), cdf);
  r.p_value = ks_pvalue(r.statistic, n);
  return r;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InternalError("ols_slope: mismatched or too-short inputs");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw InternalError("ols_slope: degenerate abscissae");
  return sxy / sxx;
}

} // namespace mixfx
