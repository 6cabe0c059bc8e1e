#pragma once

// The acceptance criteria A1-A10 as runnable checks.
//
// Statistical criteria run under up to three master seeds (base, base+1,
// base+2) and pass on a majority; evaluation stops once the outcome is
// decided. Exact criteria (A5, A8) run once.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fbmvar/harness.hpp"

namespace fbmvar::acceptance {

/// Every size, level and tolerance used by the criteria.
struct SuiteConfig {
  std::uint64_t base_seed = 1;
  unsigned threads = 0;
  int majority_seeds = 3;
  /// Replace the main replicate count / level of the selected criteria.
  std::optional<std::size_t> replicates;
  std::optional<int> level;

  // A1
  double a1_h = 0.25;
  int a1_r = 2;
  int a1_n = 12;
  std::size_t a1_replicates = 5000;
  double a1_se_multiplier = 3.0;
  double a1_runtime_seconds = 120.0;
  // A2
  int a2_n = 12;
  std::size_t a2_replicates = 5000;
  double a2_alpha = 0.01;
  // A3, A4
  int a3_n = 12;
  std::size_t a3_replicates = 5000;
  double a3_alpha = 0.01;
  double a3_corr_se_multiplier = 3.0;
  double a3_corr_slack = 0.02;
  double a3_mean_se_multiplier = 4.0;
  int a4_fine_n = 14;
  int a4_coarse_n = 8;
  std::size_t a4_l2_replicates = 500;
  double a4_l2_ratio = 0.5;
  // A5
  std::size_t a5_samples = 1000;
  double a5_tolerance = 1e-9;
  double a5_runtime_seconds = 30.0;
  // A6
  double a6_h = 0.3;
  int a6_coarse_n = 10;
  int a6_fine_n = 16;
  std::size_t a6_replicates = 2000;
  double a6_rms_threshold = 0.15;
  // A7
  int a7_level = 5;
  std::size_t a7_replicates = 20000;
  std::size_t a7_oracle_replicates = 5000;
  double a7_se_multiplier = 4.0;
  double a7_alpha = 0.01;
  // A8
  std::size_t a8_samples = 100;
  double a8_tolerance = 1e-12;
  int a8_n = 12;
  double a8_band = 4.0;
  // A9
  double a9_h = 0.25;
  int a9_n = 10;
  std::size_t a9_replicates = 5000;
  double a9_se_multiplier = 4.0;
  double a9_alpha = 0.01;
  std::size_t a9_donsker_replicates = 10000;
  // A10
  int a10_n = 12;
  std::size_t a10_replicates = 2000;
  double a10_band = 10.0;

  Json to_json() const;
};

struct Attempt {
  std::uint64_t seed = 0;
  bool passed = false;
  double wall_seconds = 0.0;
  McReport report;
};

struct CriterionResult {
  std::string id;
  std::string title;
  bool statistical = true;
  bool passed = false;
  std::vector<Attempt> attempts;

  /// One line: "<id> PASS|FAIL <title> [seed:outcome ...]".
  std::string summary() const;
  Json to_json() const;
};

std::vector<std::string> criterion_ids();
bool is_criterion(const std::string& id);
std::string criterion_title(const std::string& id);

/// Runs one attempt of a criterion under `seed` (no majority policy).
McReport run_attempt(const std::string& id, const SuiteConfig& config, std::uint64_t seed);

/// Runs a criterion under the majority policy.
CriterionResult run_criterion(const std::string& id, const SuiteConfig& config);

}  // namespace fbmvar::acceptance
