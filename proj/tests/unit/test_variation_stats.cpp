#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fbmvar/variation_stats.hpp"

using namespace fbmvar;
using Catch::Approx;

namespace {

FbmPath path_at(double h, int n, std::uint64_t seed, double t_max = 1.0) {
  return sample_fbm(HurstParam(h), GridSpec::dyadic(n, 0.0, t_max), {seed, 0});
}

double max_abs_diff(const VariationSeries& a, const VariationSeries& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_CASE("weight functions", "[weights]") {
  std::vector<double> pts{-2.0, -0.7, 0.0, 0.4, 1.9};
  for (const auto& id : weight_registry_ids()) {
    const auto f = weight_from_registry(id);
    CHECK(f.id() == id);
    for (int k = 1; k <= 6; ++k) CHECK(derivative_mismatch(f, k, pts) < 1e-6);
  }
  CHECK(weight_from_registry("x").affine());
  CHECK(weight_from_registry("one").affine());
  CHECK_FALSE(weight_from_registry("sin").affine());
  CHECK_THROWS_AS(weight_from_registry("nope"), std::invalid_argument);
  const WeightFunction rough("rough", 1, [](int k, double x) { return k == 0 ? std::abs(x) : (x > 0 ? 1.0 : -1.0); });
  CHECK_THROWS_AS(rough.derivative(2, 0.3), std::invalid_argument);
}

TEST_CASE("variation statistics basic identities", "[variation]") {
  const FbmPath p = path_at(0.25, 10, 3);
  const auto one = weights::constant(1.0);

  SECTION("f = 0 gives 0") {
    const auto s = midpoint_variation(p, weights::zero(), 2);
    for (double v : s.values) CHECK(v == 0.0);
  }
  SECTION("f = 1 midpoint equals unweighted exactly") {
    const auto a = midpoint_variation(p, one, 2);
    const auto b = unweighted_variation(p, 2);
    CHECK(a.values == b.values);
    CHECK(a.values[0] == 0.0);
    CHECK(a.size() == 1025);
  }
  SECTION("r = 1, f = 1 telescopes to the scaled endpoint") {
    const auto s = unweighted_variation(p, 1);
    const double want = std::exp2(-5.0) * std::exp2(10 * 0.25) * p.forward().back();
    CHECK(s.back() == Approx(want).epsilon(1e-12).margin(1e-14));
  }
  SECTION("affine weights: midpoint and trapezoid agree") {
    const auto f = weights::affine(1.5, -0.25);
    CHECK(max_abs_diff(midpoint_variation(p, f, 2), trapezoidal_variation(p, f, 2)) < 1e-10);
  }
  SECTION("coarse level m = n reproduces the midpoint statistic") {
    const auto f = weights::gaussian();
    CHECK(coarse_weight_variation(p, f, 2, 10).values == midpoint_variation(p, f, 2).values);
    CHECK_THROWS_AS(coarse_weight_variation(p, f, 2, 11), std::invalid_argument);
    CHECK_THROWS_AS(coarse_weight_variation(p, f, 2, 0), std::invalid_argument);
  }
  SECTION("right minus left endpoint") {
    const auto f = weights::sine();
    const auto left = endpoint_variation(p, f, 2, Endpoint::left);
    const auto right = endpoint_variation(p, f, 2, Endpoint::right);
    const auto x = p.forward();
    const double scale = std::exp2(10 * 0.25);
    double want = 0.0;
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
      const double y = scale * (x[j + 1] - x[j]);
      want += (std::sin(x[j + 1]) - std::sin(x[j])) * y * y * y;
    }
    want *= std::exp2(10 * 0.25 - 10);
    CHECK(right.back() - left.back() == Approx(want).epsilon(1e-9).margin(1e-12));
  }
  SECTION("series lookup is a right-continuous step") {
    const auto s = unweighted_variation(p, 2);
    CHECK(s.at(0.0) == 0.0);
    CHECK(s.at(0.5) == s.values[512]);
    CHECK(s.at(0.5 + 1e-6) == s.values[512]);
    CHECK(s.at(0.5 - 1e-6) == s.values[511]);
    CHECK(s.at(1.0) == s.back());
    CHECK(s.step(3) == s.values[4] - s.values[3]);
  }
  SECTION("invalid inputs") {
    CHECK_THROWS_AS(unweighted_variation(p, 0), std::invalid_argument);
    const FbmPath odd = sample_fbm(HurstParam(0.3), GridSpec::uniform(std::exp2(-0.5), 0, 4), {1, 0});
    CHECK_THROWS_AS(unweighted_variation(odd, 2), std::invalid_argument);
    CHECK_THROWS_AS(horizon_steps(p, 1.5), std::invalid_argument);
  }
}

TEST_CASE("Taylor remainder split", "[variation][taylor]") {
  const FbmPath p = path_at(0.25, 10, 8);
  SECTION("x^2 with N = 2 leaves no remainder") {
    const auto split = taylor_remainder_split(p, weights::square(), 2, 2);
    double scale = 0.0;
    for (double v : split.correction.values) scale = std::max(scale, std::abs(v));
    for (double v : split.remainder.values) CHECK(std::abs(v) <= 1e-12 * std::max(scale, 1.0));
    CHECK(scale > 0.0);
  }
  SECTION("higher order shrinks the remainder for smooth f") {
    const auto f = weights::sine();
    const double b2 = std::abs(taylor_remainder_split(p, f, 2, 2).remainder.back());
    const double b4 = std::abs(taylor_remainder_split(p, f, 2, 4).remainder.back());
    CHECK(b4 < b2);
  }
  SECTION("N = 1 has no correction") {
    const auto split = taylor_remainder_split(p, weights::sine(), 2, 1);
    for (double v : split.correction.values) CHECK(v == 0.0);
  }
  SECTION("insufficient derivative order") {
    const WeightFunction c1("c1", 1, [](int k, double x) { return k == 0 ? x * std::abs(x) : 2 * std::abs(x); });
    CHECK_THROWS_AS(taylor_remainder_split(p, c1, 2, 2), std::invalid_argument);
    CHECK_NOTHROW(taylor_remainder_split(p, c1, 2, 1));
  }
}

TEST_CASE("limit quadratures", "[variation][limit]") {
  const FbmPath p = path_at(0.3, 8, 2);
  CHECK(limit_quadrature(p, weights::constant(2.5), Integrand::f, 1.0) == 2.5);
  CHECK(limit_quadrature(p, weights::identity(), Integrand::f_prime, 0.5) == 0.5);
  CHECK(limit_quadrature(p, weights::sine(), Integrand::f, 0.0) == 0.0);
  CHECK_THROWS_AS(limit_quadrature(p, weights::sine(), Integrand::f, 0.3), std::invalid_argument);

  CHECK(simulate_limit(p, weights::zero(), 2.0, 1.0, {1, 1}) == 0.0);
  CHECK(simulate_limit(p, weights::sine(), 2.0, 1.0, {1, 1}) ==
        simulate_limit(p, weights::sine(), 2.0, 1.0, {1, 1}));

  SECTION("conditional variance matches draws") {
    const auto f = weights::cosine();
    const double want = limit_conditional_variance(p, f, 1.7, 1.0);
    const int reps = 20000;
    double s2 = 0.0;
    double s4 = 0.0;
    for (int i = 0; i < reps; ++i) {
      const double v = simulate_limit(p, f, 1.7, 1.0, {3, static_cast<std::uint64_t>(i)});
      s2 += v * v;
      s4 += v * v * v * v;
    }
    const double var = s2 / reps;
    const double se = std::sqrt((s4 / reps - var * var) / reps);
    CHECK(std::abs(var - want) < 4 * se);
  }
}
