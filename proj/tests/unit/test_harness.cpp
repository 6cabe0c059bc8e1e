#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

#include "fbmvar/acceptance.hpp"
#include "fbmvar/harness.hpp"
#include "fbmvar/stats.hpp"

using namespace fbmvar;
using Catch::Approx;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed, double mean = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(mean, 1.0);
  std::vector<double> out(n);
  for (double& v : out) v = z(rng);
  return out;
}

}  // namespace

TEST_CASE("Kolmogorov-Smirnov", "[stats][ks]") {
  SECTION("single sample closed form") {
    for (double x : {-1.0, 0.0, 0.3, 2.0}) {
      const double F = stats::normal_cdf(x);
      CHECK(stats::ks_statistic(std::vector<double>{x}, stats::normal_cdf) ==
            Approx(std::max(F, 1.0 - F)));
    }
  }
  SECTION("empirical cdf as reference") {
    std::vector<double> xs = normals(200, 3);
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    auto ecdf = [&](double x) {
      return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
             sorted.size();
    };
    CHECK(stats::ks_statistic(xs, ecdf) <= 1.0 / xs.size() + 1e-15);
  }
  SECTION("degenerate sample") {
    const std::vector<double> c(500, 0.0);
    CHECK(stats::ks_one_sample(c, stats::normal_cdf).p_value < 1e-10);
  }
  SECTION("one-sample calibration") {
    int rejections = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      if (stats::ks_one_sample(normals(200, 1000 + i), stats::normal_cdf).p_value < 0.05) ++rejections;
    }
    const double frac = rejections / 200.0;
    CHECK(frac > 0.01);
    CHECK(frac < 0.12);
  }
  SECTION("two-sample") {
    const auto a = normals(1000, 1);
    CHECK(stats::ks_two_sample(a, a).statistic == 0.0);
    CHECK(stats::ks_two_sample(a, normals(1000, 2, 3.0)).p_value < 1e-6);
    int accepted = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      if (stats::ks_two_sample(normals(500, 2 * i + 10), normals(500, 2 * i + 11)).p_value > 0.01) ++accepted;
    }
    CHECK(accepted >= 95);
  }
  SECTION("size and tail checks") {
    CHECK_THROWS_AS(stats::ks_one_sample(normals(49, 1), stats::normal_cdf), std::invalid_argument);
    CHECK_THROWS_AS(stats::ks_two_sample(normals(60, 1), normals(10, 2)), std::invalid_argument);
    CHECK(stats::kolmogorov_sf(1.3581) == Approx(0.05).margin(2e-4));
    CHECK(stats::kolmogorov_sf(1.6276) == Approx(0.01).margin(1e-4));
    CHECK(stats::kolmogorov_sf(0.0) == 1.0);
    // Both series agree where they hand over.
    CHECK(stats::kolmogorov_sf(1.0 - 1e-12) == Approx(stats::kolmogorov_sf(1.0)).epsilon(1e-9));
  }
}

TEST_CASE("sample summaries", "[stats]") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const auto m = stats::moments(xs);
  CHECK(m.mean == 2.5);
  CHECK(m.variance == Approx(5.0 / 3.0));
  CHECK(m.m4 == Approx((2 * std::pow(1.5, 4) + 2 * std::pow(0.5, 4)) / 4));
  CHECK(stats::correlation(xs, std::vector<double>{2.0, 4.0, 6.0, 8.0}) == Approx(1.0));
  CHECK(stats::ols_slope(xs, std::vector<double>{1.0, 3.0, 5.0, 7.0}) == Approx(2.0));
  CHECK_THROWS_AS(stats::moments(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("parallel replicate loop", "[harness]") {
  const auto a = replicate_values(1000, 1, [](std::size_t i) { return std::sqrt(static_cast<double>(i)); });
  const auto b = replicate_values(1000, 4, [](std::size_t i) { return std::sqrt(static_cast<double>(i)); });
  CHECK(a == b);
  try {
    parallel_for(100, 4, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "17");
  }
}

TEST_CASE("run_experiment", "[harness]") {
  ExperimentConfig c;
  c.statistic = "zero";
  c.levels = {6};
  c.replicates = 100;
  SECTION("trivial statistic is exactly zero") {
    const auto r = run_experiment(c);
    REQUIRE(r.levels.size() == 1);
    CHECK(r.levels[0].moments.mean == 0.0);
    CHECK(r.levels[0].moments.variance == 0.0);
    CHECK(r.levels[0].moments.m4 == 0.0);
  }
  SECTION("deterministic regardless of threads") {
    c.statistic = "midpoint";
    c.f = "gauss";
    c.levels = {6, 8};
    c.threads = 1;
    const std::string one = run_experiment(c).dump();
    c.threads = 3;
    CHECK(run_experiment(c).dump() == one);
    CHECK(run_experiment(c).dump() == one);
    CHECK(one.find("wall_seconds") == std::string::npos);
  }
  SECTION("doubling replicates shrinks the standard error") {
    c.statistic = "unweighted";
    c.levels = {8};
    c.replicates = 2000;
    const double se1 = run_experiment(c).levels[0].moments.se_mean;
    c.replicates = 4000;
    const double se2 = run_experiment(c).levels[0].moments.se_mean;
    CHECK(se2 / se1 == Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
  }
  SECTION("rate slope of the endpoint statistic") {
    // Var of the endpoint statistic decays like 2^{n(2H-1)}.
    c.statistic = "endpoint_left";
    c.f = "one";
    c.h = 0.3;
    c.levels = {6, 8, 10};
    c.replicates = 1000;
    const auto r = run_experiment(c);
    REQUIRE(r.rate_slope.has_value());
    CHECK(*r.rate_slope == Approx(2 * 0.3 - 1).margin(0.15));
  }
  SECTION("every statistic id runs") {
    c.levels = {5};
    for (const auto& id : statistic_ids()) {
      c.statistic = id;
      CHECK_NOTHROW(run_experiment(c));
    }
  }
  SECTION("validation") {
    c.replicates = 99;
    CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
    c.replicates = 100;
    c.alpha = 0.2;
    CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
    c.alpha = 0.01;
    c.statistic = "nope";
    CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
  }
}

TEST_CASE("moment scaling", "[harness]") {
  const RunOptions run{3, 0, 1000};
  std::vector<std::pair<double, double>> pairs{{0.25, 0.25}};
  for (int k = 1; k <= 4; ++k) pairs.emplace_back(0.25, 0.25 + std::ldexp(1.0, -k));
  // Every gap spans at least 2^10 steps at n = 14.
  const auto r = moment_scaling_test(0.3, 2, weights::constant(1.0), 14, 4, pairs, run);
  CHECK(r.metrics.at("moment_0") == 0.0);
  CHECK(r.passed());
  // Increments of Phi_n are close to Gaussian with variance proportional to
  // the gap, so E|.|^4 scales like gap^{p/2}.
  REQUIRE(r.rate_slope.has_value());
  CHECK(*r.rate_slope == Approx(2.0).margin(0.4));
  CHECK_THROWS_AS(moment_scaling_test(0.3, 2, weights::constant(1.0), 10, 3, pairs, run), std::invalid_argument);
  CHECK_THROWS_AS(moment_scaling_test(0.3, 2, weights::constant(1.0), 10, 4, {{0.1, 0.2}}, run),
                  std::invalid_argument);
}

TEST_CASE("endpoint L2 test", "[harness]") {
  const RunOptions run{4, 0, 200};
  SECTION("constant f: the error is the statistic itself and shrinks") {
    const auto r = l2_endpoint_test(0.3, 2, weights::constant(1.0), {6, 10}, 1.0, run,
                                    L2EndpointOptions{10.0});
    CHECK(r.metrics.at("rms_left_n10") < r.metrics.at("rms_left_n6"));
    CHECK(r.metrics.at("rms_right_n10") < r.metrics.at("rms_right_n6"));
  }
  CHECK_THROWS_AS(l2_endpoint_test(0.3, 1, weights::sine(), {6, 8}, 1.0, run), std::invalid_argument);
}

TEST_CASE("mixture law test", "[harness]") {
  SECTION("r = 1 is degenerate: variance falls") {
    const auto r = mixture_law_test(0.3, 1, weights::constant(1.0), 10, RunOptions{1, 0, 300});
    CHECK(r.passed());
  }
  SECTION("f = 1 reduces to a normal KS") {
    const auto r = mixture_law_test(0.25, 2, weights::constant(1.0), 10, RunOptions{2, 0, 1000});
    REQUIRE(r.ks.size() == 1);
    CHECK(r.ks[0].label == "phi_vs_normal");
    CHECK(r.ks[0].result.n_b == 0);
  }
  CHECK_THROWS_AS(mixture_law_test(0.6, 2, weights::sine(), 8, RunOptions{}), std::invalid_argument);
}

TEST_CASE("acceptance registry", "[harness][acceptance]") {
  CHECK(acceptance::criterion_ids().size() == 10);
  CHECK(acceptance::is_criterion("A10"));
  CHECK_FALSE(acceptance::is_criterion("A11"));
  CHECK_THROWS_AS(acceptance::run_criterion("nonexistent", {}), std::invalid_argument);
  const auto r = acceptance::run_criterion("A8", {});
  CHECK(r.passed);
  CHECK(r.attempts.size() == 1);
  CHECK(r.summary().rfind("A8 PASS", 0) == 0);
}
