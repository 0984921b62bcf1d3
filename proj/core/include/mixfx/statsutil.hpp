#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mixfx {

// Pairwise (cascade) summation: O(log n) error growth and a fixed association
// order, so parallel pipelines that sum per-index slots stay byte-stable.
double pairwise_sum(std::span<const double> xs);

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);      // denominator n-1 (n>=2)
double sample_sd(std::span<const double> xs);
double skewness(std::span<const double> xs);      // m3 / m2^{3/2}, biased form
double excess_kurtosis(std::span<const double> xs); // m4 / m2^2 - 3

// Empirical p-quantile with linear interpolation on the sorted sample.
double quantile(std::vector<double> xs, double p);

double normal_cdf(double x); // Phi via erfc

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);

// Asymptotic KS tail probability Q(lambda_eff) with the usual small-sample
// effective lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * D.
double ks_pvalue(double d_stat, std::size_t n);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

KsResult ks_test(std::vector<double> sample,
                 const std::function<double(double)>& cdf);

// Ordinary least squares slope of y on x (used for log-log rate checks).
double ols_slope(std::span<const double> x, std::span<const double> y);

} // namespace mixfx
