#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fbmvar/fbmbt_engine.hpp"
#include "fbmvar/stats.hpp"

using namespace fbmvar;
using Catch::Approx;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

// Spatial path on [-reach, reach] at level n/2.
FbmPath spatial_path(double h, int n, std::int64_t reach, std::uint64_t seed) {
  return sample_fbm(HurstParam(h), GridSpec::uniform(spatial_spacing(n), -reach, reach), {seed, 0});
}

}  // namespace

TEST_CASE("crossing counts by hand", "[fbmbt]") {
  // Path 0, 1, 2, 1, 2 at level 2 (t = 1 gives four steps).
  const auto w = walk_from_steps(2, {1, 1, -1, 1});
  const auto c = crossing_counts(w, 1.0);
  CHECK(c.u(0) == 1);
  CHECK(c.d(0) == 0);
  CHECK(c.u(1) == 2);
  CHECK(c.d(1) == 1);
  CHECK(c.total() == 4);
  CHECK(jstar(w, 1.0) == 2);
  for (std::int64_t j = -2; j <= 3; ++j) {
    CHECK(c.u(j) - c.d(j) == ((j == 0 || j == 1) ? 1 : 0));
    CHECK(c.u(j) - c.d(j) == net_crossing_indicator(j, 2));
  }

  const auto down = walk_from_steps(2, {-1, -1, -1});
  const auto cd = crossing_counts(down, 0.75);
  CHECK(jstar(down, 0.75) == -3);
  for (std::int64_t j = -4; j <= 1; ++j) {
    CHECK(cd.u(j) - cd.d(j) == ((j >= -3 && j <= -1) ? -1 : 0));
  }

  const auto empty = crossing_counts(w, 0.0);
  CHECK(empty.total() == 0);
  CHECK(jstar(w, 0.1) == 0);
  CHECK_THROWS_AS(crossing_counts(w, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(walk_from_steps(2, {1, 2}), std::invalid_argument);
}

TEST_CASE("random walks", "[fbmbt]") {
  const auto w = sample_walk(6, 1.0, {4, 4});
  CHECK(w.length() == 64);
  CHECK(w.s[0] == 0);
  for (std::size_t k = 0; k < w.length(); ++k) REQUIRE(std::abs(w.s[k + 1] - w.s[k]) == 1);
  CHECK(sample_walk(6, 1.0, {4, 4}).steps == w.steps);
  CHECK(sample_walk(6, 1.0, {4, 5}).steps != w.steps);
  CHECK(w.position(2) == Approx(w.s[2] / 8.0));
  CHECK_THROWS_AS(sample_walk(4, 0.01, {1, 1}), std::invalid_argument);

  SECTION("conservation and indicator on random walks") {
    for (std::uint64_t i = 0; i < 200; ++i) {
      const auto rw = sample_walk(8, 1.0, {9, i});
      const double t = static_cast<double>(i % 256) / 256.0 + 1.0 / 512.0;
      const auto c = crossing_counts(rw, t);
      REQUIRE(c.total() == c.horizon);
      const auto js = jstar(rw, t);
      for (std::int64_t j = c.j_min; j < c.j_min + static_cast<std::int64_t>(c.up.size()); ++j) {
        REQUIRE(c.u(j) - c.d(j) == net_crossing_indicator(j, js));
      }
    }
  }
  SECTION("endpoint mean 0 and variance K") {
    const int reps = 100000;
    std::vector<double> ends(reps);
    for (int i = 0; i < reps; ++i) {
      ends[i] = static_cast<double>(sample_walk(4, 1.0, {2, static_cast<std::uint64_t>(i)}).s.back());
    }
    const auto m = stats::moments(ends);
    CHECK(std::abs(m.mean) < 4 * m.se_mean);
    CHECK(std::abs(m.variance - 16.0) < 4 * m.se_variance);
  }
}

TEST_CASE("crossing and transform identities", "[fbmbt][identity]") {
  const auto ids = weight_registry_ids();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int n : {4, 8, 12}) {
    for (std::uint64_t i = 0; i < 100; ++i) {
      const double h = 0.05 + 0.9 * u(rng);
      const int r = 1 + static_cast<int>(i % 3);
      const auto f = weight_from_registry(ids[i % ids.size()]);
      const auto sample = sample_fbmbt(HurstParam(h), n, 1.0, {31, i});
      const double t = u(rng);
      const double direct = vn_direct(sample, f, r, t);
      REQUIRE(rel(direct, vn_crossing(sample, f, r, t)) <= 1e-9);
      const auto js = jstar(sample.walk, t);
      REQUIRE(rel(direct, wn(sample.path, f, r, n, js * spatial_spacing(n))) <= 1e-9);
      REQUIRE(rel(direct, wn_index(sample.path, f, r, n, js)) <= 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 300);
}

TEST_CASE("Brownian-time statistics edge cases", "[fbmbt]") {
  const auto f = weights::sine();
  const auto sample = sample_fbmbt(HurstParam(0.25), 6, 1.0, {2, 2});
  CHECK(vn_direct(sample, f, 2, 0.0) == 0.0);
  CHECK(vn_crossing(sample, f, 2, 0.0) == 0.0);
  CHECK(vn_direct(sample, weights::zero(), 2, 1.0) == 0.0);
  CHECK(sample.z[0] == 0.0);
  for (std::size_t k = 0; k < sample.z.size(); ++k) {
    REQUIRE(sample.z[k] == sample.path.at_index(sample.walk.s[k]));
  }

  SECTION("walk back at the origin gives zero") {
    const auto w = walk_from_steps(2, {1, -1, -1, 1});
    const auto p = spatial_path(0.3, 2, 2, 5);
    const auto s = make_fbmbt(w, p);
    CHECK(vn_crossing(s, f, 2, 1.0) == 0.0);
    CHECK(std::abs(vn_direct(s, f, 2, 1.0)) < 1e-15);
  }
  SECTION("single up-step is one trapezoid term") {
    const auto w = walk_from_steps(2, {1});
    const auto p = spatial_path(0.3, 2, 2, 6);
    const auto s = make_fbmbt(w, p);
    const double a = p.at_index(0);
    const double b = p.at_index(1);
    const double y = std::exp2(0.5 * 2 * 0.3) * (b - a);
    CHECK(vn_direct(s, f, 2, 0.25) == Approx(0.5 * (std::sin(a) + std::sin(b)) * y * y * y));
  }
  SECTION("coverage is enforced") {
    const auto w = walk_from_steps(2, {1, 1, 1});
    CHECK_THROWS_AS(make_fbmbt(w, spatial_path(0.3, 2, 2, 1)), std::invalid_argument);
    CHECK_THROWS_AS(make_fbmbt(w, spatial_path(0.3, 4, 4, 1)), std::invalid_argument);
  }
}

TEST_CASE("spatial sums W_n and M_n", "[fbmbt]") {
  const int n = 8;
  const auto p = spatial_path(0.3, n, 40, 12);
  const auto f = weights::gaussian();
  CHECK(wn(p, f, 2, n, 0.0) == 0.0);
  CHECK(mn(p, f, 2, n, 0.0) == 0.0);
  SECTION("f = 1, r = 1 telescopes on both sides") {
    const auto one = weights::constant(1.0);
    const double scale = std::exp2(0.5 * n * 0.3);
    CHECK(wn_index(p, one, 1, n, 25) == Approx(scale * p.at_index(25)).epsilon(1e-12));
    CHECK(wn_index(p, one, 1, n, -17) == Approx(scale * p.at_index(-17)).epsilon(1e-12));
  }
  SECTION("affine weights give M_n = W_n") {
    const auto a = weights::affine(-0.5, 2.0);
    for (std::int64_t J : {-30, -1, 1, 13, 40}) {
      CHECK(mn_index(p, a, 2, n, J) == Approx(wn_index(p, a, 2, n, J)).epsilon(1e-12));
    }
  }
  SECTION("time form snaps to the grid") {
    const double d = spatial_spacing(n);
    CHECK(spatial_index(n, 7 * d) == 7);
    CHECK(spatial_index(n, -7 * d) == -7);
    CHECK(spatial_index(n, 7.5 * d) == 7);
    CHECK(spatial_index(n, -7.5 * d) == -7);
  }
  CHECK_THROWS_AS(wn_index(p, f, 2, n, 41), std::invalid_argument);
  CHECK_THROWS_AS(wn_index(p, f, 2, n, -41), std::invalid_argument);
  CHECK_THROWS_AS(wn_index(p, f, 2, 6, 3), std::invalid_argument);
}

TEST_CASE("midpoint and trapezoid spatial sums merge", "[fbmbt][statistical]") {
  // 2^{-n/4} |M_n - W_n| at spatial time 1 shrinks in L2 as n grows.
  const auto f = weights::gaussian();
  std::vector<double> rms;
  for (int n : {6, 10, 14}) {
    const std::int64_t reach = std::int64_t{1} << (n / 2);
    const FbmSampler sampler(HurstParam(0.25), GridSpec::uniform(spatial_spacing(n), -reach, reach));
    std::vector<double> d(300);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto p = sampler.sample({77, i});
      d[i] = std::exp2(-0.25 * n) * (mn(p, f, 2, n, 1.0) - wn(p, f, 2, n, 1.0));
    }
    rms.push_back(stats::root_mean_square(d).value);
  }
  CHECK(rms[1] < rms[0]);
  CHECK(rms[2] < rms[1]);
}
