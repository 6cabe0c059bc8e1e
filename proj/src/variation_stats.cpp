#include "fbmvar/variation_stats.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "fbmvar/kernels.hpp"
#include "fbmvar/numeric.hpp"

namespace fbmvar {

namespace {

int dyadic_level(const FbmPath& path) {
  const int n = path.grid.level();
  if (n < 1) throw std::invalid_argument("variation statistics need a dyadic time grid");
  return n;
}

void require_r(int r) {
  if (r < 1) throw std::invalid_argument("r must be a positive integer");
}

void scale_series(VariationSeries& s, double factor) {
  for (double& v : s.values) v *= factor;
}

std::vector<double> map_values(std::span<const double> xs, const WeightFunction& f, int k = 0) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = f.derivative(k, xs[i]);
  return out;
}

}  // namespace

double VariationSeries::at(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("series time must be nonnegative");
  const double k = std::floor(std::ldexp(t, level));
  const std::size_t last = values.size() - 1;
  if (k >= static_cast<double>(last)) return values[last];
  return values[static_cast<std::size_t>(k)];
}

std::int64_t horizon_steps(const FbmPath& path, double t) {
  const int n = dyadic_level(path);
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
  const auto k = static_cast<std::int64_t>(std::floor(std::ldexp(t, n)));
  if (k > path.grid.k_max()) throw std::invalid_argument("time lies beyond the path horizon");
  return k;
}

StepQuantities step_quantities(const FbmPath& path, const WeightFunction& f) {
  const auto x = path.forward();
  const std::size_t steps = x.size() - 1;
  const auto& kern = kernels::active();
  StepQuantities q;
  q.increment.resize(steps);
  q.midpoint.resize(steps);
  kern.forward_difference(x.data(), q.increment.data(), steps);
  kern.pairwise_mean(x.data(), q.midpoint.data(), steps);
  const std::vector<double> fx = map_values(x, f);
  q.trapezoid.resize(steps);
  kern.pairwise_mean(fx.data(), q.trapezoid.data(), steps);
  return q;
}

VariationSeries raw_variation(const FbmPath& path, const std::vector<double>& weights, int r) {
  require_r(r);
  const int n = dyadic_level(path);
  const auto x = path.forward();
  const std::size_t steps = x.size() - 1;
  if (weights.size() != steps) throw std::invalid_argument("one weight per step is required");
  const auto& kern = kernels::active();

  std::vector<double> inc(steps);
  kern.forward_difference(x.data(), inc.data(), steps);
  std::vector<double> terms(steps);
  const double scale = std::exp2(n * path.h.value());
  kern.weighted_odd_power(inc.data(), weights.data(), scale, 2 * r - 1, terms.data(), steps);

  VariationSeries s;
  s.level = n;
  s.times.resize(steps + 1);
  s.values.resize(steps + 1);
  NeumaierSum acc;
  s.values[0] = 0.0;
  s.times[0] = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    acc.add(terms[j]);
    s.values[j + 1] = acc.value();
    s.times[j + 1] = std::ldexp(static_cast<double>(j + 1), -n);
  }
  return s;
}

VariationSeries midpoint_variation(const FbmPath& path, const WeightFunction& f, int r) {
  const int n = dyadic_level(path);
  const auto x = path.forward();
  std::vector<double> mid(x.size() - 1);
  kernels::active().pairwise_mean(x.data(), mid.data(), mid.size());
  VariationSeries s = raw_variation(path, map_values(mid, f), r);
  scale_series(s, std::exp2(-0.5 * n));
  return s;
}

VariationSeries trapezoidal_variation(const FbmPath& path, const WeightFunction& f, int r) {
  const int n = dyadic_level(path);
  const auto x = path.forward();
  const std::vector<double> fx = map_values(x, f);
  std::vector<double> trap(x.size() - 1);
  kernels::active().pairwise_mean(fx.data(), trap.data(), trap.size());
  VariationSeries s = raw_variation(path, trap, r);
  scale_series(s, std::exp2(-0.5 * n));
  return s;
}

VariationSeries endpoint_variation(const FbmPath& path, const WeightFunction& f, int r,
                                   Endpoint side) {
  const int n = dyadic_level(path);
  const auto x = path.forward();
  const std::size_t steps = x.size() - 1;
  const auto nodes = side == Endpoint::left ? x.first(steps) : x.subspan(1);
  VariationSeries s = raw_variation(path, map_values(nodes, f), r);
  scale_series(s, std::exp2(n * path.h.value() - n));
  return s;
}

VariationSeries unweighted_variation(const FbmPath& path, int r) {
  const int n = dyadic_level(path);
  VariationSeries s = raw_variation(path, std::vector<double>(path.forward().size() - 1, 1.0), r);
  scale_series(s, std::exp2(-0.5 * n));
  return s;
}

VariationSeries coarse_weight_variation(const FbmPath& path, const WeightFunction& f, int r,
                                        int m) {
  const int n = dyadic_level(path);
  if (m < 1) throw std::invalid_argument("coarse level m must be positive");
  if (m > n) throw std::invalid_argument("coarse level m must not exceed the path level");
  const auto x = path.forward();
  const std::size_t steps = x.size() - 1;
  const int shift = n - m;
  std::vector<double> weights(steps);
  std::int64_t cached_k = -1;
  double cached_w = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    const std::int64_t k = static_cast<std::int64_t>(j) >> shift;
    if (k != cached_k) {
      const std::size_t a = static_cast<std::size_t>(k) << shift;
      const std::size_t b = static_cast<std::size_t>(k + 1) << shift;
      if (b >= x.size()) {
        throw std::invalid_argument("path horizon is not a multiple of the coarse spacing");
      }
      cached_w = f(0.5 * (x[a] + x[b]));
      cached_k = k;
    }
    weights[j] = cached_w;
  }
  VariationSeries s = raw_variation(path, weights, r);
  scale_series(s, std::exp2(-0.5 * n));
  return s;
}

TaylorSplit taylor_remainder_split(const FbmPath& path, const WeightFunction& f, int r, int N) {
  if (N < 1) throw std::invalid_argument("Taylor order N must be positive");
  const int half = N / 2;
  if (f.order() < 2 * half) {
    throw std::invalid_argument("weight function '" + f.id() + "' lacks derivative order " +
                                std::to_string(2 * half));
  }
  const int n = dyadic_level(path);
  const StepQuantities q = step_quantities(path, f);
  const std::size_t steps = q.increment.size();

  std::vector<double> coeff(static_cast<std::size_t>(half) + 1, 0.0);
  for (int k = 1; k <= half; ++k) {
    double denom = std::ldexp(1.0, 2 * k);  // 4^k
    for (int i = 2; i <= 2 * k; ++i) denom *= i;
    coeff[static_cast<std::size_t>(k)] = 1.0 / denom;
  }

  std::vector<double> weights(steps, 0.0);
  for (std::size_t j = 0; j < steps; ++j) {
    const double d2 = q.increment[j] * q.increment[j];
    double power = 1.0;
    double w = 0.0;
    for (int k = 1; k <= half; ++k) {
      power *= d2;
      w += coeff[static_cast<std::size_t>(k)] * f.derivative(2 * k, q.midpoint[j]) * power;
    }
    weights[j] = w;
  }

  TaylorSplit out;
  out.correction = raw_variation(path, weights, r);
  scale_series(out.correction, std::exp2(-0.5 * n));

  const VariationSeries psi = trapezoidal_variation(path, f, r);
  const VariationSeries phi = midpoint_variation(path, f, r);
  out.remainder = out.correction;
  for (std::size_t k = 0; k < out.remainder.values.size(); ++k) {
    out.remainder.values[k] = (psi.values[k] - phi.values[k]) - out.correction.values[k];
  }
  return out;
}

double limit_quadrature(const FbmPath& path, const WeightFunction& f, Integrand which, double t) {
  const int n = dyadic_level(path);
  if (std::ldexp(t, n) != std::floor(std::ldexp(t, n))) {
    throw std::invalid_argument("quadrature time must lie on the grid");
  }
  const std::int64_t steps = horizon_steps(path, t);
  const int k = which == Integrand::f ? 0 : 1;
  const auto x = path.forward();
  const double dt = std::ldexp(1.0, -n);
  NeumaierSum sum;
  double prev = f.derivative(k, x[0]);
  for (std::int64_t j = 0; j < steps; ++j) {
    const double next = f.derivative(k, x[static_cast<std::size_t>(j + 1)]);
    sum.add(0.5 * (prev + next) * dt);
    prev = next;
  }
  return sum.value();
}

double simulate_limit(const FbmPath& path, const WeightFunction& f, double sigma, double t,
                      const SeedSpec& seed) {
  const int n = dyadic_level(path);
  const std::int64_t steps = horizon_steps(path, t);
  const auto x = path.forward();
  Engine engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::exp2(-0.5 * n);
  NeumaierSum sum;
  for (std::int64_t j = 0; j < steps; ++j) {
    sum.add(f(x[static_cast<std::size_t>(j)]) * sd * normal(engine));
  }
  return sigma * sum.value();
}

double limit_conditional_variance(const FbmPath& path, const WeightFunction& f, double sigma,
                                  double t) {
  const int n = dyadic_level(path);
  const std::int64_t steps = horizon_steps(path, t);
  const auto x = path.forward();
  NeumaierSum sum;
  for (std::int64_t j = 0; j < steps; ++j) {
    const double v = f(x[static_cast<std::size_t>(j)]);
    sum.add(v * v);
  }
  return sigma * sigma * sum.value() * std::ldexp(1.0, -n);
}

}  // namespace fbmvar
