#include "fbmvar/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "fbmvar/fbmbt_engine.hpp"
#include "fbmvar/variation_stats.hpp"

#ifndef FBMVAR_VERSION
#define FBMVAR_VERSION "0.0.0"
#endif

namespace fbmvar {

const char* artifact_version() noexcept { return "fbmvar " FBMVAR_VERSION; }

unsigned resolve_threads(unsigned requested) noexcept {
  if (requested > 0) return requested;
  return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> replicate_values(std::size_t count, unsigned threads,
                                     const std::function<double(std::size_t)>& fn) {
  std::vector<double> out(count);
  parallel_for(count, threads, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

// ------------------------------------------------------------------ config

std::vector<std::string> statistic_ids() {
  return {"zero",           "midpoint", "trapezoid", "unweighted", "endpoint_left",
          "endpoint_right", "coarse",   "fbmbt",     "terminal"};
}

void ExperimentConfig::validate() const {
  const auto ids = statistic_ids();
  if (std::find(ids.begin(), ids.end(), statistic) == ids.end()) {
    throw std::invalid_argument("unknown statistic '" + statistic + "'");
  }
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("h must lie in (0, 1)");
  if (r < 1) throw std::invalid_argument("r must be a positive integer");
  weight_from_registry(f);
  if (levels.empty()) throw std::invalid_argument("at least one level is required");
  for (int n : levels) {
    if (n < 1 || n > 24) throw std::invalid_argument("levels must lie in [1, 24]");
  }
  if (replicates < 100) throw std::invalid_argument("replicates must be at least 100");
  if (!(t > 0.0) || t > 64.0) throw std::invalid_argument("t must lie in (0, 64]");
  if (!(alpha > 0.0 && alpha <= 0.1)) throw std::invalid_argument("alpha must lie in (0, 0.1]");
  if (!(se_multiplier > 0.0)) throw std::invalid_argument("se_multiplier must be positive");
  if (statistic == "coarse") {
    for (int n : levels) {
      if (m < 1 || m > n) throw std::invalid_argument("coarse level m must lie in [1, n]");
    }
  }
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["statistic"] = statistic;
  j["h"] = h;
  j["r"] = r;
  j["f"] = f;
  j["levels"] = levels;
  j["replicates"] = replicates;
  j["master_seed"] = master_seed;
  j["t"] = t;
  j["m"] = m;
  j["alpha"] = alpha;
  j["se_multiplier"] = se_multiplier;
  return j;
}

// ------------------------------------------------------------------ report

bool McReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
}

bool McReport::check(std::string name, double value, std::string relation, double threshold) {
  bool ok = false;
  if (relation == "<") {
    ok = value < threshold;
  } else if (relation == "<=") {
    ok = value <= threshold;
  } else if (relation == ">") {
    ok = value > threshold;
  } else if (relation == ">=") {
    ok = value >= threshold;
  } else {
    throw std::invalid_argument("unknown relation '" + relation + "'");
  }
  checks.push_back({std::move(name), value, std::move(relation), threshold, ok});
  return ok;
}

void McReport::merge(const McReport& other, const std::string& prefix) {
  for (const auto& l : other.levels) levels.push_back(l);
  for (auto k : other.ks) {
    k.label = prefix + k.label;
    ks.push_back(std::move(k));
  }
  for (const auto& [key, v] : other.metrics) metrics[prefix + key] = v;
  for (auto c : other.checks) {
    c.name = prefix + c.name;
    checks.push_back(std::move(c));
  }
  if (!other.config.is_null()) config[prefix.empty() ? "fragment" : prefix] = other.config;
}

namespace {

Json number(double v) {
  if (std::isfinite(v)) return Json(v);
  return Json(std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"));
}

}  // namespace

Json McReport::to_json() const {
  Json j;
  j["version"] = artifact_version();
  j["config"] = config;
  j["seeds"] = seeds;
  Json lv = Json::array();
  for (const auto& l : levels) {
    Json e;
    e["n"] = l.n;
    e["count"] = l.moments.count;
    e["mean"] = number(l.moments.mean);
    e["variance"] = number(l.moments.variance);
    e["third_central"] = number(l.moments.m3);
    e["fourth_central"] = number(l.moments.m4);
    e["se_mean"] = number(l.moments.se_mean);
    e["se_variance"] = number(l.moments.se_variance);
    lv.push_back(std::move(e));
  }
  j["levels"] = std::move(lv);
  Json ks_json = Json::array();
  for (const auto& k : ks) {
    Json e;
    e["label"] = k.label;
    e["statistic"] = number(k.result.statistic);
    e["p_value"] = number(k.result.p_value);
    e["n_a"] = k.result.n_a;
    e["n_b"] = k.result.n_b;
    ks_json.push_back(std::move(e));
  }
  j["ks"] = std::move(ks_json);
  Json mj = Json::object();
  for (const auto& [key, v] : metrics) mj[key] = number(v);
  j["metrics"] = std::move(mj);
  if (rate_slope) j["rate_slope"] = number(*rate_slope);
  Json cj = Json::array();
  for (const auto& c : checks) {
    Json e;
    e["name"] = c.name;
    e["value"] = number(c.value);
    e["relation"] = c.relation;
    e["threshold"] = number(c.threshold);
    e["pass"] = c.pass;
    cj.push_back(std::move(e));
  }
  j["checks"] = std::move(cj);
  j["passed"] = passed();
  if (wall_seconds) j["wall_seconds"] = *wall_seconds;
  return j;
}

std::string McReport::dump() const { return to_json().dump(2); }

// -------------------------------------------------------------- experiment

namespace {

GridSpec forward_grid(int n, double t) {
  const double steps = std::ceil(std::ldexp(t, n));
  return GridSpec::dyadic(n, 0.0, std::ldexp(std::max(steps, 1.0), -n));
}

double fbm_statistic(const ExperimentConfig& c, const WeightFunction& f, const FbmPath& path) {
  const std::string& s = c.statistic;
  if (s == "zero") return midpoint_variation(path, weights::zero(), c.r).at(c.t);
  if (s == "midpoint") return midpoint_variation(path, f, c.r).at(c.t);
  if (s == "trapezoid") return trapezoidal_variation(path, f, c.r).at(c.t);
  if (s == "unweighted") return unweighted_variation(path, c.r).at(c.t);
  if (s == "endpoint_left") return endpoint_variation(path, f, c.r, Endpoint::left).at(c.t);
  if (s == "endpoint_right") return endpoint_variation(path, f, c.r, Endpoint::right).at(c.t);
  if (s == "coarse") return coarse_weight_variation(path, f, c.r, c.m).at(c.t);
  if (s == "terminal") return path.forward()[static_cast<std::size_t>(horizon_steps(path, c.t))];
  throw std::invalid_argument("statistic '" + s + "' is not path-based");
}

}  // namespace

McReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const WeightFunction f = weight_from_registry(config.f);
  const HurstParam h(config.h);

  McReport report;
  report.config = config.to_json();
  report.seeds = {config.master_seed};
  for (int n : config.levels) {
    std::vector<double> values;
    if (config.statistic == "fbmbt") {
      const double norm = std::exp2(-0.25 * n);
      values = replicate_values(config.replicates, config.threads, [&](std::size_t i) {
        const FbmbtSample s = sample_fbmbt(h, n, config.t, SeedSpec{config.master_seed, i});
        return norm * vn_direct(s, f, config.r, config.t);
      });
    } else {
      const FbmSampler sampler(h, forward_grid(n, config.t));
      values = replicate_values(config.replicates, config.threads, [&](std::size_t i) {
        const FbmPath path = sampler.sample(SeedSpec{config.master_seed, i}.for_role(role::path));
        return fbm_statistic(config, f, path);
      });
    }
    report.levels.push_back({n, stats::moments(values)});
  }

  if (report.levels.size() >= 2) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& l : report.levels) {
      if (!(l.moments.variance > 0.0)) {
        xs.clear();
        break;
      }
      xs.push_back(l.n);
      ys.push_back(std::log2(l.moments.variance));
    }
    if (xs.size() >= 2) report.rate_slope = stats::ols_slope(xs, ys);
  }
  if (config.timing) {
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return report;
}

// ---------------------------------------------------------- moment scaling

McReport moment_scaling_test(double h, int r, const WeightFunction& f, int n, int p,
                             const std::vector<std::pair<double, double>>& pairs,
                             const RunOptions& run, const MomentScalingOptions& opts) {
  if (p != 4 && p != 6) throw std::invalid_argument("moment order p must be 4 or 6");
  if (pairs.empty()) throw std::invalid_argument("at least one (s, t) pair is required");
  const double grid_step = std::ldexp(1.0, -n);
  double horizon = 0.0;
  for (const auto& [s, t] : pairs) {
    if (!(s >= 0.0 && t >= s)) throw std::invalid_argument("pairs need 0 <= s <= t");
    if (std::fmod(s, grid_step) != 0.0 || std::fmod(t, grid_step) != 0.0) {
      throw std::invalid_argument("pairs must lie on the level-n grid");
    }
    horizon = std::max(horizon, t);
  }
  const HurstParam hp(h);
  const FbmSampler sampler(hp, forward_grid(n, std::max(horizon, grid_step)));
  const std::size_t np = pairs.size();
  std::vector<double> diffs(run.replicates * np);
  parallel_for(run.replicates, run.threads, [&](std::size_t i) {
    const FbmPath path = sampler.sample(SeedSpec{run.master_seed, i}.for_role(role::path));
    const VariationSeries phi = midpoint_variation(path, f, r);
    for (std::size_t k = 0; k < np; ++k) {
      diffs[i * np + k] = phi.at(pairs[k].second) - phi.at(pairs[k].first);
    }
  });

  McReport report;
  report.config = {{"test", "moment_scaling"}, {"h", h},          {"r", r},
                   {"f", f.id()},              {"n", n},          {"p", p},
                   {"replicates", run.replicates}, {"master_seed", run.master_seed},
                   {"band", opts.band}};
  Json pj = Json::array();
  for (const auto& [s, t] : pairs) pj.push_back({s, t});
  report.config["pairs"] = pj;
  report.seeds = {run.master_seed};

  std::vector<double> moment(np);
  std::vector<double> rhs(np);
  std::size_t coarsest = 0;
  for (std::size_t k = 0; k < np; ++k) {
    std::vector<double> col(run.replicates);
    for (std::size_t i = 0; i < run.replicates; ++i) col[i] = diffs[i * np + k];
    const auto am = stats::abs_moment(col, p);
    moment[k] = am.value;
    const double gap = pairs[k].second - pairs[k].first;
    rhs[k] = std::pow(gap, 0.5 * p) + std::pow(gap, p * h);
    if (gap > pairs[coarsest].second - pairs[coarsest].first) coarsest = k;
    report.metrics["moment_" + std::to_string(k)] = am.value;
    report.metrics["moment_se_" + std::to_string(k)] = am.se;
    report.metrics["gap_" + std::to_string(k)] = gap;
  }
  const double c_fit = rhs[coarsest] > 0.0 ? moment[coarsest] / rhs[coarsest] : 0.0;
  report.metrics["c_fit"] = c_fit;
  double max_ratio = 0.0;
  for (std::size_t k = 0; k < np; ++k) {
    const double ratio = (c_fit > 0.0 && rhs[k] > 0.0) ? moment[k] / (c_fit * rhs[k]) : 0.0;
    report.metrics["ratio_" + std::to_string(k)] = ratio;
    max_ratio = std::max(max_ratio, ratio);
  }

  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t k = 0; k < np; ++k) {
    const double gap = pairs[k].second - pairs[k].first;
    if (gap > 0.0 && moment[k] > 0.0) {
      lx.push_back(std::log2(gap));
      ly.push_back(std::log2(moment[k]));
    }
  }
  if (lx.size() >= 2) {
    report.rate_slope = stats::ols_slope(lx, ly);
    report.metrics["gap_exponent"] = *report.rate_slope;
  }
  report.check("max_ratio_to_fitted_bound", max_ratio, "<=", opts.band);
  return report;
}

// ------------------------------------------------------------- L2 endpoint

McReport l2_endpoint_test(double h, int r, const WeightFunction& f, const std::vector<int>& n_list,
                          double t, const RunOptions& run, const L2EndpointOptions& opts) {
  if (r < 2) throw std::invalid_argument("the endpoint limits need r >= 2");
  if (n_list.size() < 2) throw std::invalid_argument("at least two levels are required");
  if (f.order() < 1) throw std::invalid_argument("f' is required");
  const HurstParam hp(h);
  const double half_mu = 0.5 * gaussian_moment(2 * r);

  McReport report;
  report.config = {{"test", "l2_endpoint"}, {"h", h}, {"r", r}, {"f", f.id()},
                   {"levels", n_list},     {"t", t}, {"replicates", run.replicates},
                   {"master_seed", run.master_seed}, {"rms_threshold", opts.rms_threshold}};
  report.seeds = {run.master_seed};

  struct Rms {
    double left, right, trap;
  };
  std::vector<Rms> per_level;
  for (int n : n_list) {
    const FbmSampler sampler(hp, forward_grid(n, t));
    const double trap_norm = std::exp2(n * (h - 0.5));
    std::vector<double> el(run.replicates), er(run.replicates), et(run.replicates);
    parallel_for(run.replicates, run.threads, [&](std::size_t i) {
      const FbmPath path = sampler.sample(SeedSpec{run.master_seed, i}.for_role(role::path));
      const double q = limit_quadrature(path, f, Integrand::f_prime, t);
      el[i] = endpoint_variation(path, f, r, Endpoint::left).at(t) + half_mu * q;
      er[i] = endpoint_variation(path, f, r, Endpoint::right).at(t) - half_mu * q;
      et[i] = trap_norm * trapezoidal_variation(path, f, r).at(t);
    });
    const auto left = stats::root_mean_square(el);
    const auto right = stats::root_mean_square(er);
    const auto trap = stats::root_mean_square(et);
    const std::string tag = "_n" + std::to_string(n);
    report.metrics["rms_left" + tag] = left.value;
    report.metrics["rms_left_se" + tag] = left.se;
    report.metrics["rms_right" + tag] = right.value;
    report.metrics["rms_right_se" + tag] = right.se;
    report.metrics["rms_trapezoid" + tag] = trap.value;
    report.metrics["rms_trapezoid_se" + tag] = trap.se;
    report.levels.push_back({n, stats::moments(el)});
    per_level.push_back({left.value, right.value, trap.value});
  }
  const Rms& first = per_level.front();
  const Rms& last = per_level.back();
  report.check("rms_left_last_vs_first", last.left, "<", first.left);
  report.check("rms_left_last", last.left, "<", opts.rms_threshold);
  report.check("rms_right_last_vs_first", last.right, "<", first.right);
  report.check("rms_right_last", last.right, "<", opts.rms_threshold);
  report.check("rms_trapezoid_vs_left", last.trap, "<", last.left);
  report.check("rms_trapezoid_vs_right", last.trap, "<", last.right);
  return report;
}

// ------------------------------------------------------------- mixture law

McReport mixture_law_test(double h, int r, const WeightFunction& f, int n, const RunOptions& run,
                          const MixtureOptions& opts) {
  const HurstParam hp(h);
  if (!hp.subdiffusive()) throw std::invalid_argument("the mixture law needs H < 1/2");
  const bool trapezoid = opts.statistic == MixtureStatistic::trapezoid;
  auto statistic = [&](const FbmPath& path) {
    return trapezoid ? trapezoidal_variation(path, f, r).at(1.0)
                     : midpoint_variation(path, f, r).at(1.0);
  };

  McReport report;
  report.config = {{"test", "mixture_law"},
                   {"statistic", trapezoid ? "trapezoid" : "midpoint"},
                   {"h", h},
                   {"r", r},
                   {"f", f.id()},
                   {"n", n},
                   {"replicates", run.replicates},
                   {"master_seed", run.master_seed},
                   {"alpha", opts.alpha},
                   {"mean_se_multiplier", opts.mean_se_multiplier},
                   {"corr_se_multiplier", opts.corr_se_multiplier},
                   {"corr_slack", opts.corr_slack}};
  report.seeds = {run.master_seed};

  if (r == 1) {
    const int coarse = std::max(1, n / 2);
    std::vector<double> var;
    for (int level : {coarse, n}) {
      const FbmSampler sampler(hp, forward_grid(level, 1.0));
      const auto values = replicate_values(run.replicates, run.threads, [&](std::size_t i) {
        return statistic(sampler.sample(SeedSpec{run.master_seed, i}.for_role(role::path)));
      });
      const auto m = stats::moments(values);
      report.levels.push_back({level, m});
      var.push_back(m.variance);
    }
    report.check("variance_decreases", var[1], "<", var[0]);
    return report;
  }

  const double sigma = sigma_r(r, hp).value;
  const FbmSampler sampler(hp, forward_grid(n, 1.0));
  const std::size_t terminal = std::size_t{1} << n;
  std::vector<double> phi(run.replicates), x1(run.replicates), limit(run.replicates);
  parallel_for(run.replicates, run.threads, [&](std::size_t i) {
    const SeedSpec seed{run.master_seed, i};
    const FbmPath path = sampler.sample(seed.for_role(role::path));
    phi[i] = statistic(path);
    x1[i] = path.forward()[terminal];
    const FbmPath other = sampler.sample(seed.for_role(role::oracle));
    limit[i] = simulate_limit(other, f, sigma, 1.0, seed.for_role(role::limit_noise));
  });

  const auto m = stats::moments(phi);
  report.levels.push_back({n, m});
  report.metrics["sigma_r"] = sigma;
  report.metrics["limit_variance"] = stats::moments(limit).variance;

  const bool constant_weight = f.affine() && f.derivative(1, 0.0) == 0.0;
  if (constant_weight) {
    const double scale = std::abs(sigma * f(0.0));
    if (!(scale > 0.0)) throw std::invalid_argument("degenerate limit: sigma_r f = 0");
    const auto res =
        stats::ks_one_sample(phi, [scale](double x) { return stats::normal_cdf(x / scale); });
    report.ks.push_back({"phi_vs_normal", res});
    report.check("ks_p_value", res.p_value, ">", opts.alpha);
  } else {
    const auto res = stats::ks_two_sample(phi, limit);
    report.ks.push_back({"phi_vs_limit", res});
    report.check("ks_p_value", res.p_value, ">", opts.alpha);
  }
  report.check("abs_mean_over_se", m.se_mean > 0.0 ? std::abs(m.mean) / m.se_mean : 0.0, "<=",
               opts.mean_se_multiplier);
  const double corr = stats::correlation(phi, x1);
  report.metrics["corr_phi_x1"] = corr;
  report.check("abs_corr_phi_x1", std::abs(corr), "<",
               opts.corr_se_multiplier / std::sqrt(static_cast<double>(run.replicates)) +
                   opts.corr_slack);
  return report;
}

}  // namespace fbmvar
