#include "fbmvar/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fbmvar/numeric.hpp"

namespace fbmvar::stats {

namespace {

std::vector<double> sorted_copy(std::span<const double> xs) {
  std::vector<double> out(xs.begin(), xs.end());
  for (double x : out) {
    if (std::isnan(x)) throw std::invalid_argument("KS input contains NaN");
  }
  std::sort(out.begin(), out.end());
  return out;
}

double asymptotic_p(double d, double effective_n) {
  const double root = std::sqrt(effective_n);
  return kolmogorov_sf((root + 0.12 + 0.11 / root) * d);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_sf(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.0) {
    // Jacobi theta form of the cdf converges fast for small lambda.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double odd = 2.0 * k - 1.0;
      sum += std::exp(-odd * odd * c);
    }
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("KS statistic needs at least one sample");
  const std::vector<double> xs = sorted_copy(samples);
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS statistic needs nonempty samples");
  const std::vector<double> xa = sorted_copy(a);
  const std::vector<double> xb = sorted_copy(b);
  const double na = static_cast<double>(xa.size());
  const double nb = static_cast<double>(xb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double x = std::min(xa[i], xb[j]);
    while (i < xa.size() && xa[i] == x) ++i;
    while (j < xb.size() && xb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

KsResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.size() < kMinKsSamples) {
    throw std::invalid_argument("KS test needs at least 50 samples");
  }
  KsResult r;
  r.n_a = samples.size();
  r.statistic = ks_statistic(samples, cdf);
  r.p_value = asymptotic_p(r.statistic, static_cast<double>(r.n_a));
  return r;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < kMinKsSamples || b.size() < kMinKsSamples) {
    throw std::invalid_argument("KS test needs at least 50 samples in each group");
  }
  KsResult r;
  r.n_a = a.size();
  r.n_b = b.size();
  r.statistic = ks_two_sample_statistic(a, b);
  const double na = static_cast<double>(r.n_a);
  const double nb = static_cast<double>(r.n_b);
  r.p_value = asymptotic_p(r.statistic, na * nb / (na + nb));
  return r;
}

Moments moments(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("moments need at least two samples");
  Moments m;
  m.count = xs.size();
  const double n = static_cast<double>(xs.size());
  NeumaierSum s1;
  for (double x : xs) s1.add(x);
  m.mean = s1.value() / n;
  NeumaierSum s2, s3, s4;
  for (double x : xs) {
    const double d = x - m.mean;
    const double d2 = d * d;
    s2.add(d2);
    s3.add(d2 * d);
    s4.add(d2 * d2);
  }
  const double m2 = s2.value() / n;
  m.variance = s2.value() / (n - 1.0);
  m.m3 = s3.value() / n;
  m.m4 = s4.value() / n;
  m.se_mean = std::sqrt(m.variance / n);
  m.se_variance = std::sqrt(std::max(m.m4 - m2 * m2, 0.0) / n);
  return m;
}

AbsMoment abs_moment(std::span<const double> xs, double p) {
  if (xs.size() < 2) throw std::invalid_argument("moments need at least two samples");
  std::vector<double> powers(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) powers[i] = std::pow(std::abs(xs[i]), p);
  const Moments m = moments(powers);
  return {m.mean, m.se_mean};
}

AbsMoment root_mean_square(std::span<const double> xs) {
  const AbsMoment sq = abs_moment(xs, 2.0);
  const double rms = std::sqrt(sq.value);
  return {rms, rms > 0.0 ? sq.se / (2.0 * rms) : 0.0};
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("correlation needs two equal-length samples");
  }
  const Moments mx = moments(x);
  const Moments my = moments(y);
  NeumaierSum sxy;
  for (std::size_t i = 0; i < x.size(); ++i) sxy.add((x[i] - mx.mean) * (y[i] - my.mean));
  const double denom = std::sqrt(mx.variance * my.variance) * static_cast<double>(x.size() - 1);
  return denom > 0.0 ? sxy.value() / denom : 0.0;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("regression needs two equal-length samples");
  }
  const Moments mx = moments(x);
  const Moments my = moments(y);
  NeumaierSum sxy;
  for (std::size_t i = 0; i < x.size(); ++i) sxy.add((x[i] - mx.mean) * (y[i] - my.mean));
  return sxy.value() / (mx.variance * static_cast<double>(x.size() - 1));
}

}  // namespace fbmvar::stats
