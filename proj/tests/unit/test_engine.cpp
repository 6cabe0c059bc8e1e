#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <random>
#include <set>

#include "fbmvar/error.hpp"
#include "fbmvar/fbm_engine.hpp"
#include "fbmvar/kernels.hpp"
#include "fbmvar/rng.hpp"

using namespace fbmvar;
using Catch::Approx;

TEST_CASE("seed derivation", "[rng]") {
  const SeedSpec a{7, 3};
  Engine e1 = make_engine(a);
  Engine e2 = make_engine(a);
  for (int i = 0; i < 100; ++i) REQUIRE(e1() == e2());

  std::set<std::uint64_t> firsts;
  for (std::uint64_t m = 0; m < 16; ++m) {
    for (std::uint64_t s = 0; s < 16; ++s) firsts.insert(make_engine({m, s})());
  }
  CHECK(firsts.size() == 256);

  CHECK(a.for_role(role::path) != a.for_role(role::walk));
  CHECK(a.for_role(role::path).stream_id == a.stream_id);
  CHECK(make_engine(a.for_role(role::path))() != make_engine(a)());
  // Re-keying is injective in the master seed for a fixed role.
  std::set<std::uint64_t> keyed;
  for (std::uint64_t m = 0; m < 1000; ++m) keyed.insert(SeedSpec{m, 0}.for_role(role::oracle).master_seed);
  CHECK(keyed.size() == 1000);
}

TEST_CASE("kernel variants agree", "[kernels]") {
  using kernels::Isa;
  const auto& scalar = kernels::table(Isa::scalar);
  CHECK(scalar.isa == Isa::scalar);
  if (!kernels::isa_available(Isa::avx2)) {
    SUCCEED("AVX2 not available on this machine");
    return;
  }
  const auto& simd = kernels::table(Isa::avx2);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z(0.0, 1.0);
  for (std::size_t n : {0UL, 1UL, 3UL, 4UL, 7UL, 8UL, 13UL, 64UL, 1001UL}) {
    std::vector<double> a(n + 1), b(n + 1), w(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      a[i] = z(rng);
      b[i] = z(rng);
      w[i] = z(rng);
    }
    std::vector<double> o1(2 * n + 2, 0.0), o2(2 * n + 2, 0.0);
    for (int power : {1, 3, 5, 7}) {
      scalar.weighted_odd_power(a.data(), w.data(), 3.7, power, o1.data(), n);
      simd.weighted_odd_power(a.data(), w.data(), 3.7, power, o2.data(), n);
      for (std::size_t i = 0; i < n; ++i) REQUIRE(o1[i] == o2[i]);
    }
    scalar.forward_difference(a.data(), o1.data(), n);
    simd.forward_difference(a.data(), o2.data(), n);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(o1[i] == o2[i]);
    scalar.pairwise_mean(a.data(), o1.data(), n);
    simd.pairwise_mean(a.data(), o2.data(), n);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(o1[i] == o2[i]);
    scalar.spectral_scale(w.data(), a.data(), b.data(), o1.data(), n);
    simd.spectral_scale(w.data(), a.data(), b.data(), o2.data(), n);
    for (std::size_t i = 0; i < 2 * n; ++i) REQUIRE(o1[i] == o2[i]);

    std::vector<double> acc1(n * (n + 1) / 2 + 1, 0.5), acc2(n * (n + 1) / 2 + 1, 0.5);
    scalar.outer_accumulate(a.data(), n, acc1.data());
    simd.outer_accumulate(a.data(), n, acc2.data());
    for (std::size_t i = 0; i < acc1.size(); ++i) REQUIRE(acc1[i] == acc2[i]);

    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(scalar.dot(a.data(), b.data(), n) - simd.dot(a.data(), b.data(), n)) <=
          1e-14 * mag + 1e-300);
  }
  CHECK(kernels::isa_name(Isa::avx2) == "avx2");
}

TEST_CASE("grid specifications", "[fbm]") {
  const auto g = GridSpec::dyadic(3, -1.0, 2.0);
  CHECK(g.level() == 3);
  CHECK(g.k_min() == -8);
  CHECK(g.k_max() == 16);
  CHECK(g.point_count() == 25);
  CHECK(g.offset(0) == 8);
  CHECK(g.time(-8) == -1.0);
  CHECK_THROWS_AS(GridSpec::dyadic(0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec::dyadic(3, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec::dyadic(3, 0.5, 1.0), std::invalid_argument);
  CHECK(GridSpec::uniform(0.25, -2, 3).level() == 2);
  CHECK(GridSpec::uniform(std::exp2(-0.5), -2, 3).level() == -1);
}

TEST_CASE("circulant embedding", "[fbm]") {
  SECTION("eigenvalues nonnegative across H") {
    for (double hv : {0.05, 0.2, 0.25, 0.4, 0.5, 0.7, 0.95}) {
      for (std::size_t count : {1UL, 2UL, 100UL, 4096UL}) {
        const CirculantFgn fgn(HurstParam(hv), count);
        CHECK(fgn.min_raw_eigenvalue() >= kEigenvalueFloor);
        for (double v : fgn.eigenvalues()) REQUIRE(v >= 0.0);
        CHECK(fgn.embedding_size() >= 2 * (count - 1));
      }
    }
  }
  SECTION("reproducible and seed sensitive") {
    const auto a = sample_fgn_circulant(HurstParam(0.3), 64, 0.5, {1, 2});
    const auto b = sample_fgn_circulant(HurstParam(0.3), 64, 0.5, {1, 2});
    const auto c = sample_fgn_circulant(HurstParam(0.3), 64, 0.5, {1, 3});
    CHECK(a == b);
    CHECK(a != c);
  }
  SECTION("lag correlations within 4 SE") {
    const HurstParam h(0.25);
    const CirculantFgn fgn(h, 8);
    const int reps = 20000;
    std::vector<double> sum(4, 0.0);
    std::vector<double> x(8);
    Engine e = make_engine({42, 0});
    for (int i = 0; i < reps; ++i) {
      fgn.sample(e, 1.0, x);
      for (int lag = 0; lag < 4; ++lag) sum[lag] += x[0] * x[lag];
    }
    for (int lag = 0; lag < 4; ++lag) {
      const double rho = fgn_correlation(h, lag);
      const double se = std::sqrt((1.0 + rho * rho) / reps);
      CHECK(std::abs(sum[lag] / reps - rho) < 4 * se);
    }
  }
  CHECK_THROWS_AS(CirculantFgn(HurstParam(0.3), 0), std::invalid_argument);
}

TEST_CASE("fbm paths", "[fbm]") {
  const HurstParam h(0.3);
  const auto grid = GridSpec::dyadic(6, -1.0, 1.0);
  const FbmPath p = sample_fbm(h, grid, {5, 0});
  CHECK(p.at_index(0) == 0.0);
  CHECK(p.values.size() == grid.point_count());
  CHECK(p.forward().size() == 65);
  CHECK(sample_fbm(h, grid, {5, 0}).values == p.values);

  SECTION("terminal variance scales as t^{2H}") {
    const FbmSampler sampler(h, GridSpec::dyadic(4, 0.0, 2.0));
    const int reps = 20000;
    double s = 0.0;
    double s4 = 0.0;
    for (int i = 0; i < reps; ++i) {
      const double x = sampler.sample({9, static_cast<std::uint64_t>(i)}).values.back();
      s += x * x;
      s4 += x * x * x * x;
    }
    const double var = s / reps;
    const double se = std::sqrt((s4 / reps - var * var) / reps);
    CHECK(std::abs(var - std::pow(2.0, 2 * 0.3)) < 4 * se);
  }

  SECTION("Cholesky oracle") {
    const auto small = GridSpec::dyadic(3, -1.0, 1.0);
    const FbmPath q = sample_fbm_cholesky(h, small, {1, 1});
    CHECK(q.at_index(0) == 0.0);
    CHECK_THROWS_AS(CholeskyFbm(h, GridSpec::dyadic(12, 0.0, 1.0)), std::invalid_argument);
    const CholeskyError err(7, -1e-3);
    CHECK(err.minor() == 7);
    const SpectralError spec(3, -0.5);
    CHECK(spec.index() == 3);
    CHECK(spec.eigenvalue() == -0.5);
  }
}
