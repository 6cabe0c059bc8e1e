#pragma once

// Monte Carlo experiment driver. Replicate i of an experiment with master
// seed M draws everything from SeedSpec{M, i} (re-keyed per role), and
// results are reduced in replicate order, so a report depends only on the
// configuration and never on the thread count.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbmvar/fbm_engine.hpp"
#include "fbmvar/stats.hpp"
#include "fbmvar/weight_function.hpp"

namespace fbmvar {

using Json = nlohmann::ordered_json;

/// Version string embedded in every report and output artifact.
const char* artifact_version() noexcept;

/// Hardware thread count when `requested` is 0.
unsigned resolve_threads(unsigned requested) noexcept;

/// Runs fn(i) for i in [0, count) on up to `threads` workers. If any call
/// throws, the exception from the lowest failing index is rethrown after
/// all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// One value per replicate, computed in parallel, returned in index order.
std::vector<double> replicate_values(std::size_t count, unsigned threads,
                                     const std::function<double(std::size_t)>& fn);

struct ExperimentConfig {
  /// zero | midpoint | trapezoid | unweighted | endpoint_left | endpoint_right |
  /// coarse | fbmbt | terminal
  std::string statistic = "midpoint";
  double h = 0.25;
  int r = 2;
  std::string f = "one";
  std::vector<int> levels{10};
  std::size_t replicates = 1000;
  std::uint64_t master_seed = 1;
  double t = 1.0;
  int m = 2;  // coarse level for statistic "coarse"
  unsigned threads = 0;
  double alpha = 0.01;
  double se_multiplier = 3.0;
  bool timing = false;

  /// Throws std::invalid_argument on the first violated constraint.
  void validate() const;
  Json to_json() const;
};

std::vector<std::string> statistic_ids();

struct LevelEstimate {
  int n = 0;
  stats::Moments moments;
};

struct KsEntry {
  std::string label;
  stats::KsResult result;
};

/// A single asserted comparison: pass iff `value relation threshold`.
struct CheckLine {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<", "<=", ">", ">="
  double threshold = 0.0;
  bool pass = false;
};

struct McReport {
  Json config;
  std::vector<LevelEstimate> levels;
  std::vector<KsEntry> ks;
  std::map<std::string, double> metrics;
  std::vector<CheckLine> checks;
  std::optional<double> rate_slope;  // log2 variance per level
  std::vector<std::uint64_t> seeds;
  std::optional<double> wall_seconds;

  bool passed() const;
  /// Records a check and returns its outcome.
  bool check(std::string name, double value, std::string relation, double threshold);
  void merge(const McReport& other, const std::string& prefix);
  Json to_json() const;
  std::string dump() const;
};

/// Per-level moments of the configured statistic at time t, plus the
/// log2-variance regression slope across levels when there are several.
McReport run_experiment(const ExperimentConfig& config);

/// Shared run parameters for the test fragments below.
struct RunOptions {
  std::uint64_t master_seed = 1;
  unsigned threads = 0;
  std::size_t replicates = 1000;
};

struct MomentScalingOptions {
  double band = 10.0;  // every ratio to the fitted bound must stay <= band
};

/// Estimates E|Phi_n(t) - Phi_n(s)|^p per pair, fits C on the pair with the
/// largest t - s, and reports ratios to C((t-s)^{p/2} + (t-s)^{pH}) with
/// their maximum, plus the log2 moment-vs-gap slope.
McReport moment_scaling_test(double h, int r, const WeightFunction& f, int n, int p,
                             const std::vector<std::pair<double, double>>& pairs,
                             const RunOptions& run, const MomentScalingOptions& opts = {});

struct L2EndpointOptions {
  double rms_threshold = 0.15;
};

/// Root-mean-square L2 errors per level of the left and right endpoint
/// statistics against -/+ mu_{2r}/2 int_0^t f'(X_s) ds on the same path, and
/// of the trapezoid statistic under the endpoint normalization against 0.
McReport l2_endpoint_test(double h, int r, const WeightFunction& f, const std::vector<int>& n_list,
                          double t, const RunOptions& run, const L2EndpointOptions& opts = {});

enum class MixtureStatistic { midpoint, trapezoid };

struct MixtureOptions {
  double alpha = 0.01;
  double mean_se_multiplier = 4.0;
  double corr_se_multiplier = 3.0;
  double corr_slack = 0.02;
  MixtureStatistic statistic = MixtureStatistic::midpoint;
};

/// Two-sample KS of Phi_n(1) against sigma_r int_0^1 f(X) dW draws on
/// independent paths; mean and correlation with X_1 checks. For r = 1 the
/// limit is degenerate and the check is Var(Phi_n(1)) < Var(Phi_{n/2}(1)).
McReport mixture_law_test(double h, int r, const WeightFunction& f, int n, const RunOptions& run,
                          const MixtureOptions& opts = {});

}  // namespace fbmvar
