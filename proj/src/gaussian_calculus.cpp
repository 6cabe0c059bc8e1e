#include "fbmvar/gaussian_calculus.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fbmvar/error.hpp"
#include "fbmvar/numeric.hpp"

namespace fbmvar {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw OverflowError(std::string(what) + ": exceeds 64-bit integer range");
  }
  return out;
}

double factorial_double(int k) {
  double out = 1.0;
  for (int i = 2; i <= k; ++i) out *= i;
  return out;
}

void require_positive_r(int r) {
  if (r < 1) throw std::invalid_argument("r must be a positive integer");
}

// <d_{[a,b]}, 1/2(eps_e + eps_f)> = 1/2 E[(X_b - X_a)(X_e + X_f)].
double increment_vs_average(HurstParam h, double a, double b, double e, double f) {
  return 0.5 * ((fbm_covariance(h, b, e) - fbm_covariance(h, a, e)) +
                (fbm_covariance(h, b, f) - fbm_covariance(h, a, f)));
}

}  // namespace

HurstParam::HurstParam(double h) : h_(h) {
  if (!(h > 0.0 && h < 1.0)) {
    throw std::invalid_argument("Hurst parameter must lie in (0, 1), got " + std::to_string(h));
  }
}

double hermite_eval(int p, double x) {
  if (p < 0) throw std::invalid_argument("Hermite degree must be nonnegative");
  if (p == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < p; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::uint64_t factorial_exact(int k) {
  if (k < 0) throw std::invalid_argument("factorial of a negative integer");
  std::uint64_t out = 1;
  for (int i = 2; i <= k; ++i) out = checked_mul(out, static_cast<std::uint64_t>(i), "factorial");
  return out;
}

HermiteCoeffs hermite_coeffs(int r) {
  require_positive_r(r);
  HermiteCoeffs out;
  out.r = r;
  out.exact.reserve(static_cast<std::size_t>(r));
  out.c.reserve(static_cast<std::size_t>(r));
  for (int u = 1; u <= r; ++u) {
    const int w = HermiteCoeffs::degree(r, u);
    // (2r-1)! / w! as a falling product, then divide by (u-1)! 2^{u-1}.
    std::uint64_t num = 1;
    for (int i = w + 1; i <= 2 * r - 1; ++i) {
      num = checked_mul(num, static_cast<std::uint64_t>(i), "Hermite coefficient");
    }
    std::uint64_t den = factorial_exact(u - 1);
    den = checked_mul(den, std::uint64_t{1} << (u - 1), "Hermite coefficient");
    if (num % den != 0) throw Error("Hermite coefficient is not integral");
    out.exact.push_back(num / den);
    out.c.push_back(static_cast<double>(num / den));
  }
  return out;
}

double gaussian_moment(int p) {
  if (p < 0) throw std::invalid_argument("moment order must be nonnegative");
  if (p % 2 == 1) return 0.0;
  double out = 1.0;
  for (int i = p - 1; i > 1; i -= 2) out *= i;
  return out;
}

std::uint64_t gaussian_moment_exact(int p) {
  if (p < 0) throw std::invalid_argument("moment order must be nonnegative");
  if (p % 2 == 1) return 0;
  std::uint64_t out = 1;
  for (int i = p - 1; i > 1; i -= 2) {
    out = checked_mul(out, static_cast<std::uint64_t>(i), "Gaussian moment");
  }
  return out;
}

double fbm_covariance(HurstParam h, double s, double t) {
  const double two_h = 2.0 * h.value();
  return 0.5 * (std::pow(std::abs(s), two_h) + std::pow(std::abs(t), two_h) -
                std::pow(std::abs(t - s), two_h));
}

double fgn_correlation(HurstParam h, std::int64_t j) {
  const double two_h = 2.0 * h.value();
  const std::int64_t k = j < 0 ? -j : j;
  if (k == 0) return 1.0;
  if (k == 1) return 0.5 * (std::pow(2.0, two_h) - 2.0);
  // Second difference of x^{2H} written relative to k^{2H} so the
  // cancellation costs O(eps k) rather than O(eps k^2).
  const double inv = 1.0 / static_cast<double>(k);
  const double up = std::expm1(two_h * std::log1p(inv));
  const double down = std::expm1(two_h * std::log1p(-inv));
  return 0.5 * std::pow(static_cast<double>(k), two_h) * (up + down);
}

double bivariate_odd_moment(int r, double rho) {
  require_positive_r(r);
  if (!(std::abs(rho) <= 1.0)) throw std::invalid_argument("correlation must lie in [-1, 1]");
  const HermiteCoeffs coeffs = hermite_coeffs(r);
  double sum = 0.0;
  for (int u = 1; u <= r; ++u) {
    const int w = HermiteCoeffs::degree(r, u);
    const double c = coeffs.c[static_cast<std::size_t>(u - 1)];
    sum += c * c * factorial_double(w) * std::pow(rho, w);
  }
  return sum;
}

SigmaR sigma_r(int r, HurstParam h, const SigmaOptions& opts) {
  require_positive_r(r);
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const double hv = h.value();
  if (opts.strict && hv >= 0.5) {
    throw std::invalid_argument("sigma_r requires H < 1/2 in strict mode");
  }
  if (hv > 0.5) {
    throw ConvergenceError("lag series for sigma_r diverges for H > 1/2");
  }

  const HermiteCoeffs coeffs = hermite_coeffs(r);
  const double mu = gaussian_moment(4 * r - 2);

  // Degree-one chaos: sum_{j>=1} rho_H(j) = lim 1/2((N+1)^{2H} - N^{2H} - 1).
  const double c_lin = coeffs.c.back();
  const double linear_limit = hv < 0.5 ? -0.5 : 0.0;

  struct Chaos {
    int w;
    double weight;  // c_u^2 w!
  };
  std::vector<Chaos> higher;
  for (int u = 1; u < r; ++u) {
    const int w = HermiteCoeffs::degree(r, u);
    const double c = coeffs.c[static_cast<std::size_t>(u - 1)];
    higher.push_back({w, c * c * factorial_double(w)});
  }

  // |rho_H(j)| <= H|1-2H| (j-1)^{2H-2} for j >= 2, so for q = w(2-2H) > 1
  // sum_{j>J} |rho_H(j)|^w <= beta^w (J^{-q} + J^{1-q}/(q-1)).
  const double beta = hv * std::abs(1.0 - 2.0 * hv);
  auto tail = [&](std::int64_t lag) {
    const double J = static_cast<double>(lag);
    double out = 0.0;
    for (const Chaos& ch : higher) {
      const double q = ch.w * (2.0 - 2.0 * hv);
      out += ch.weight * std::pow(beta, ch.w) * (std::pow(J, -q) + std::pow(J, 1.0 - q) / (q - 1.0));
    }
    return 2.0 * out;
  };

  std::int64_t lags = 0;
  double tail_bound = 0.0;
  if (!higher.empty()) {
    lags = 64;
    while (tail(lags) > opts.tol) {
      if (lags >= opts.max_terms) {
        throw ConvergenceError("sigma_r tail bound did not reach tolerance within the lag cap");
      }
      lags *= 2;
    }
    tail_bound = tail(lags);
  }

  NeumaierSum series;
  for (std::int64_t j = lags; j >= 1; --j) {
    const double rho = fgn_correlation(h, j);
    for (const Chaos& ch : higher) series.add(ch.weight * std::pow(rho, ch.w));
  }

  double value_sq = mu + 2.0 * c_lin * c_lin * linear_limit + 2.0 * series.value();
  if (value_sq < 0.0) {
    if (value_sq < -opts.tol) throw Error("sigma_r^2 is negative beyond tolerance");
    value_sq = 0.0;
  }

  SigmaR out;
  out.r = r;
  out.h = hv;
  out.value_sq = value_sq;
  out.value = std::sqrt(value_sq);
  out.tail_bound = tail_bound;
  out.terms = lags;
  return out;
}

std::vector<SigmaTerm> sigma_r_terms(int r, HurstParam h, std::int64_t count) {
  std::vector<SigmaTerm> out;
  for (std::int64_t j = 1; j <= count; ++j) {
    const double rho = fgn_correlation(h, j);
    out.push_back({j, rho, bivariate_odd_moment(r, rho)});
  }
  return out;
}

namespace {

struct DyadicRange {
  std::int64_t lo;
  std::int64_t hi;
};

DyadicRange lemma27_range(int n, double s, double t) {
  if (n < 1) throw std::invalid_argument("level n must be positive");
  if (!(s >= 0.0) || !(s < t)) throw std::invalid_argument("lemma27_sum requires 0 <= s < t");
  const double scale = std::ldexp(1.0, n);
  return {static_cast<std::int64_t>(std::floor(scale * s)),
          static_cast<std::int64_t>(std::floor(scale * t))};
}

}  // namespace

double lemma27_sum(HurstParam h, int n, double s, double t) {
  const auto [lo, hi] = lemma27_range(n, s, t);
  const double step = std::ldexp(1.0, -n);
  NeumaierSum sum;
  for (std::int64_t j = lo; j < hi; ++j) {
    const double a = static_cast<double>(j) * step;
    const double b = static_cast<double>(j + 1) * step;
    // 1/2 E[(X_b - X_a)(X_b + X_a)]
    const double inner = 0.5 * (fbm_covariance(h, b, b) + fbm_covariance(h, b, a) -
                                fbm_covariance(h, a, b) - fbm_covariance(h, a, a));
    sum.add(std::abs(inner));
  }
  return sum.value();
}

double lemma27_closed_form(HurstParam h, int n, double s, double t) {
  const auto [lo, hi] = lemma27_range(n, s, t);
  const double two_h = 2.0 * h.value();
  const double scale = 0.5 * std::exp2(-two_h * n);
  if (lo == 0) return scale * std::pow(static_cast<double>(hi), two_h);
  // lo^{2H} ((hi/lo)^{2H} - 1) avoids cancelling two large powers.
  const double ratio = static_cast<double>(hi - lo) / static_cast<double>(lo);
  return scale * std::pow(static_cast<double>(lo), two_h) * std::expm1(two_h * std::log1p(ratio));
}

double lemma27_displayed_bound(HurstParam h, int n, double s, double t) {
  const auto [lo, hi] = lemma27_range(n, s, t);
  return 0.5 * std::exp2(-2.0 * h.value() * n) *
         std::pow(static_cast<double>(hi - lo), 2.0 * h.value());
}

double lemma26_sum(HurstParam h, int n, int m, double T) {
  if (m < 2) throw std::invalid_argument("lemma26_sum requires m >= 2");
  if (n <= m) throw std::invalid_argument("lemma26_sum requires n > m");
  if (!h.subdiffusive()) throw std::invalid_argument("lemma26_sum requires H < 1/2");
  if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
  const std::int64_t count = static_cast<std::int64_t>(std::floor(std::ldexp(T, n)));
  const double fine = std::ldexp(1.0, -n);
  const double coarse = std::ldexp(1.0, -m);
  const int shift = n - m;
  NeumaierSum sum;
  for (std::int64_t j = 0; j < count; ++j) {
    const std::int64_t k = j >> shift;
    const double a = static_cast<double>(j) * fine;
    const double b = static_cast<double>(j + 1) * fine;
    const double e = static_cast<double>(k) * coarse;
    const double f = static_cast<double>(k + 1) * coarse;
    sum.add(std::abs(increment_vs_average(h, a, b, e, f)));
  }
  return sum.value();
}

}  // namespace fbmvar
