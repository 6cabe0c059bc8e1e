#pragma once

// Sample summaries and Kolmogorov-Smirnov tests for the Monte Carlo harness.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fbmvar::stats {

/// Minimum sample size for the KS tests.
inline constexpr std::size_t kMinKsSamples = 50;

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;  // 0 for the one-sample test
};

/// sup_x |F_emp(x) - cdf(x)| for any sample size >= 1.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);
/// sup_x |F_a(x) - F_b(x)| for nonempty samples.
double ks_two_sample_statistic(std::span<const double> a, std::span<const double> b);

/// Two-sided one-sample test with the asymptotic Kolmogorov p-value
/// (Stephens' small-sample correction). Throws for fewer than 50 samples.
KsResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_sf(double lambda);

double normal_cdf(double x);

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double m3 = 0.0;        // central moments (biased)
  double m4 = 0.0;
  double se_mean = 0.0;
  /// Delta-method standard error of the variance, sqrt((m4 - var^2) / count).
  double se_variance = 0.0;
};

/// Two-pass moments; requires count >= 2.
Moments moments(std::span<const double> xs);

/// Mean of |x|^p with its standard error.
struct AbsMoment {
  double value = 0.0;
  double se = 0.0;
};
AbsMoment abs_moment(std::span<const double> xs, double p);

/// Root mean square with the delta-method standard error.
AbsMoment root_mean_square(std::span<const double> xs);

double correlation(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace fbmvar::stats
