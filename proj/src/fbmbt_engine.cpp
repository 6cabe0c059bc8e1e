#include "fbmvar/fbmbt_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "fbmvar/numeric.hpp"

namespace fbmvar {

namespace {

void require_level(int n) {
  if (n < 1) throw std::invalid_argument("level n must be a positive integer");
  if (n > 40) throw std::invalid_argument("level n too fine");
}

void require_r(int r) {
  if (r < 1) throw std::invalid_argument("r must be a positive integer");
}

double odd_power(double y, int power) {
  const double y2 = y * y;
  double p = y;
  for (int i = 1; i < power; i += 2) p *= y2;
  return p;
}

std::int64_t checked_horizon(const EmbeddedWalk& walk, double t) {
  const std::int64_t k = walk_horizon(walk.level, t);
  if (k > static_cast<std::int64_t>(walk.length())) {
    throw std::invalid_argument("horizon floor(2^n t) = " + std::to_string(k) +
                                " exceeds the walk length " + std::to_string(walk.length()));
  }
  return k;
}

void require_spatial_grid(const FbmPath& path, int n) {
  require_level(n);
  if (path.grid.spacing() != spatial_spacing(n)) {
    throw std::invalid_argument("path spacing does not match 2^{-n/2}");
  }
}

// Shared by the W and M forms: walks the signed index range and feeds each
// interval's endpoints (in mirrored order for J < 0) to `weight`.
template <class Weight>
double spatial_sum(const FbmPath& path, int r, int n, std::int64_t J, Weight weight) {
  require_r(r);
  require_spatial_grid(path, n);
  if (!path.grid.contains(J)) {
    throw std::invalid_argument("spatial range insufficient for index " + std::to_string(J));
  }
  const double scale = std::exp2(0.5 * n * path.h.value());
  const int power = 2 * r - 1;
  const std::int64_t sign = J >= 0 ? 1 : -1;
  const std::int64_t count = J >= 0 ? J : -J;
  NeumaierSum sum;
  for (std::int64_t j = 0; j < count; ++j) {
    const double a = path.at_index(sign * j);
    const double b = path.at_index(sign * (j + 1));
    sum.add(weight(a, b) * odd_power(scale * (b - a), power));
  }
  return sum.value();
}

}  // namespace

std::int64_t EmbeddedWalk::min() const { return *std::min_element(s.begin(), s.end()); }
std::int64_t EmbeddedWalk::max() const { return *std::max_element(s.begin(), s.end()); }

double EmbeddedWalk::position(std::size_t k) const {
  return static_cast<double>(s.at(k)) * spatial_spacing(level);
}

std::int64_t walk_horizon(int n, double t) {
  require_level(n);
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("time must be finite and nonnegative");
  const double k = std::floor(std::ldexp(t, n));
  if (k > 1e9) throw std::invalid_argument("walk horizon too long");
  return static_cast<std::int64_t>(k);
}

EmbeddedWalk walk_from_steps(int n, std::vector<int> steps) {
  require_level(n);
  EmbeddedWalk w;
  w.level = n;
  w.s.resize(steps.size() + 1);
  w.s[0] = 0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (steps[k] != 1 && steps[k] != -1) throw std::invalid_argument("walk steps must be +1 or -1");
    w.s[k + 1] = w.s[k] + steps[k];
  }
  w.steps = std::move(steps);
  return w;
}

EmbeddedWalk sample_walk(int n, double t, const SeedSpec& seed) {
  const std::int64_t K = walk_horizon(n, t);
  if (K < 1) throw std::invalid_argument("floor(2^n t) must be at least 1");
  Engine engine = make_engine(seed);
  std::vector<int> steps(static_cast<std::size_t>(K));
  std::uint64_t bits = 0;
  int left = 0;
  for (auto& step : steps) {
    if (left == 0) {
      bits = engine();
      left = 64;
    }
    step = (bits & 1U) != 0 ? 1 : -1;
    bits >>= 1;
    --left;
  }
  EmbeddedWalk w = walk_from_steps(n, std::move(steps));
  w.seed = seed;
  return w;
}

std::int64_t CrossingCounts::u(std::int64_t j) const {
  const std::int64_t i = j - j_min;
  return i >= 0 && i < static_cast<std::int64_t>(up.size()) ? up[static_cast<std::size_t>(i)] : 0;
}

std::int64_t CrossingCounts::d(std::int64_t j) const {
  const std::int64_t i = j - j_min;
  return i >= 0 && i < static_cast<std::int64_t>(down.size()) ? down[static_cast<std::size_t>(i)]
                                                              : 0;
}

std::int64_t CrossingCounts::total() const {
  std::int64_t out = 0;
  for (std::size_t i = 0; i < up.size(); ++i) out += up[i] + down[i];
  return out;
}

CrossingCounts crossing_counts(const EmbeddedWalk& walk, double t) {
  const std::int64_t K = checked_horizon(walk, t);
  CrossingCounts c;
  c.level = walk.level;
  c.horizon = K;
  if (K == 0) return c;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  for (std::int64_t k = 0; k <= K; ++k) {
    lo = std::min(lo, walk.s[static_cast<std::size_t>(k)]);
    hi = std::max(hi, walk.s[static_cast<std::size_t>(k)]);
  }
  c.j_min = lo;
  c.up.assign(static_cast<std::size_t>(hi - lo), 0);
  c.down.assign(static_cast<std::size_t>(hi - lo), 0);
  for (std::int64_t k = 0; k < K; ++k) {
    const std::int64_t from = walk.s[static_cast<std::size_t>(k)];
    if (walk.steps[static_cast<std::size_t>(k)] > 0) {
      ++c.up[static_cast<std::size_t>(from - lo)];
    } else {
      ++c.down[static_cast<std::size_t>(from - 1 - lo)];
    }
  }
  return c;
}

std::int64_t jstar(const EmbeddedWalk& walk, double t) {
  return walk.s[static_cast<std::size_t>(checked_horizon(walk, t))];
}

int net_crossing_indicator(std::int64_t j, std::int64_t js) {
  if (js > 0) return (j >= 0 && j < js) ? 1 : 0;
  if (js < 0) return (j >= js && j < 0) ? -1 : 0;
  return 0;
}

double spatial_spacing(int n) { return std::exp2(-0.5 * n); }

FbmbtSample make_fbmbt(EmbeddedWalk walk, FbmPath path) {
  require_spatial_grid(path, walk.level);
  if (!path.grid.contains(walk.min()) || !path.grid.contains(walk.max())) {
    throw std::invalid_argument("spatial path does not cover the walk's range");
  }
  FbmbtSample out{std::move(walk), std::move(path), {}};
  out.z.resize(out.walk.s.size());
  for (std::size_t k = 0; k < out.z.size(); ++k) out.z[k] = out.path.at_index(out.walk.s[k]);
  return out;
}

FbmbtSample sample_fbmbt(HurstParam h, int n, double t, const SeedSpec& seed) {
  EmbeddedWalk walk = sample_walk(n, t, seed.for_role(role::walk));
  walk.seed = seed;
  // The grid needs k_min <= 0 < k_max even when the walk never goes up.
  const GridSpec grid =
      GridSpec::uniform(spatial_spacing(n), walk.min(), std::max<std::int64_t>(walk.max(), 1));
  FbmPath path = sample_fbm(h, grid, seed.for_role(role::path));
  path.seed = seed;
  return make_fbmbt(std::move(walk), std::move(path));
}

double vn_direct(const FbmbtSample& sample, const WeightFunction& f, int r, double t) {
  require_r(r);
  const std::int64_t K = checked_horizon(sample.walk, t);
  const double scale = std::exp2(0.5 * sample.walk.level * sample.path.h.value());
  const int power = 2 * r - 1;
  NeumaierSum sum;
  for (std::int64_t k = 0; k < K; ++k) {
    const double a = sample.z[static_cast<std::size_t>(k)];
    const double b = sample.z[static_cast<std::size_t>(k + 1)];
    sum.add(0.5 * (f(a) + f(b)) * odd_power(scale * (b - a), power));
  }
  return sum.value();
}

double vn_crossing(const FbmbtSample& sample, const WeightFunction& f, int r, double t) {
  require_r(r);
  const CrossingCounts c = crossing_counts(sample.walk, t);
  const double scale = std::exp2(0.5 * sample.walk.level * sample.path.h.value());
  const int power = 2 * r - 1;
  NeumaierSum sum;
  for (std::size_t i = 0; i < c.up.size(); ++i) {
    const std::int64_t net = c.up[i] - c.down[i];
    if (net == 0) continue;
    const std::int64_t j = c.j_min + static_cast<std::int64_t>(i);
    const double a = sample.path.at_index(j);
    const double b = sample.path.at_index(j + 1);
    sum.add(static_cast<double>(net) * 0.5 * (f(a) + f(b)) * odd_power(scale * (b - a), power));
  }
  return sum.value();
}

double wn_index(const FbmPath& path, const WeightFunction& f, int r, int n, std::int64_t J) {
  return spatial_sum(path, r, n, J, [&f](double a, double b) { return 0.5 * (f(a) + f(b)); });
}

double mn_index(const FbmPath& path, const WeightFunction& f, int r, int n, std::int64_t J) {
  return spatial_sum(path, r, n, J, [&f](double a, double b) { return f(0.5 * (a + b)); });
}

std::int64_t spatial_index(int n, double t) {
  require_level(n);
  if (!std::isfinite(t)) throw std::invalid_argument("time must be finite");
  const double x = t / spatial_spacing(n);
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) {
    return static_cast<std::int64_t>(nearest);
  }
  return static_cast<std::int64_t>(std::trunc(x));
}

double wn(const FbmPath& path, const WeightFunction& f, int r, int n, double t) {
  return wn_index(path, f, r, n, spatial_index(n, t));
}

double mn(const FbmPath& path, const WeightFunction& f, int r, int n, double t) {
  return mn_index(path, f, r, n, spatial_index(n, t));
}

}  // namespace fbmvar
