#pragma once

// Weighted odd-power variations of an fBm path as partial-sum processes on
// the dyadic grid, and the quadratures that appear in their limits.
//
// Every statistic sums over j = 0 .. floor(2^n t) - 1 and is a
// right-continuous step function of t.

#include <cstdint>
#include <utility>
#include <vector>

#include "fbmvar/fbm_engine.hpp"
#include "fbmvar/gaussian_calculus.hpp"
#include "fbmvar/weight_function.hpp"

namespace fbmvar {

/// Partial sums aligned with the dyadic instants k 2^-n, k = 0..K.
struct VariationSeries {
  int level = 0;
  std::vector<double> times;
  std::vector<double> values;  // values[0] == 0

  std::size_t size() const noexcept { return values.size(); }
  /// Value at time t (floor to the grid, clamped to the last instant).
  double at(double t) const;
  double back() const { return values.back(); }
  /// Per-step summand j (values[j+1] - values[j]).
  double step(std::size_t j) const { return values[j + 1] - values[j]; }
};

/// Increment, midpoint and trapezoid weight for each step of a path.
struct StepQuantities {
  std::vector<double> increment;  // X_{j+1} - X_j
  std::vector<double> midpoint;   // (X_j + X_{j+1}) / 2
  std::vector<double> trapezoid;  // (f(X_j) + f(X_{j+1})) / 2
};

StepQuantities step_quantities(const FbmPath& path, const WeightFunction& f);

enum class Endpoint { left, right };
enum class Integrand { f, f_prime };

/// Phi_n: 2^{-n/2} sum f(beta_j) (2^{nH} Delta_j X)^{2r-1}.
VariationSeries midpoint_variation(const FbmPath& path, const WeightFunction& f, int r);
/// Psi_n: trapezoid weights 1/2 (f(X_j) + f(X_{j+1})).
VariationSeries trapezoidal_variation(const FbmPath& path, const WeightFunction& f, int r);
/// 2^{nH-n} sum f(X_node) (2^{nH} Delta_j X)^{2r-1} with the left or right node.
VariationSeries endpoint_variation(const FbmPath& path, const WeightFunction& f, int r,
                                   Endpoint side);
/// 2^{-n/2} sum (2^{nH} Delta_j X)^{2r-1}.
VariationSeries unweighted_variation(const FbmPath& path, int r);
/// Weights frozen at the coarse midpoint beta_{k(j),m}, k(j) = floor(j 2^{m-n}).
VariationSeries coarse_weight_variation(const FbmPath& path, const WeightFunction& f, int r,
                                        int m);

/// Unnormalized sums sum_j w_j (2^{nH} Delta_j X)^{2r-1} (no outer scale),
/// shared by the statistics above.
VariationSeries raw_variation(const FbmPath& path, const std::vector<double>& weights, int r);

struct TaylorSplit {
  VariationSeries correction;  // A_n: even-derivative Taylor terms
  VariationSeries remainder;   // B_n = (Psi_n - Phi_n) - A_n
};

/// Splits Psi_n - Phi_n using
/// 1/2(f(x)+f(y)) = f(m) + sum_{k=1}^{floor(N/2)} f^{(2k)}(m) (y-x)^{2k} / ((2k)! 4^k) + R_N.
/// Requires f.order() >= 2 floor(N/2).
TaylorSplit taylor_remainder_split(const FbmPath& path, const WeightFunction& f, int r, int N);

/// Trapezoid rule for int_0^t g(X_s) ds at the path's resolution, g = f or f'.
double limit_quadrature(const FbmPath& path, const WeightFunction& f, Integrand which, double t);

/// One draw of sigma * sum_{j < floor(2^n t)} f(X_{j 2^-n}) dW_j with fresh
/// N(0, 2^-n) increments dW_j, conditionally on the path.
double simulate_limit(const FbmPath& path, const WeightFunction& f, double sigma, double t,
                      const SeedSpec& seed);
/// Conditional variance of simulate_limit given the path:
/// sigma^2 sum_j f(X_{j 2^-n})^2 2^-n.
double limit_conditional_variance(const FbmPath& path, const WeightFunction& f, double sigma,
                                  double t);

/// floor(2^n t) checked against the path horizon.
std::int64_t horizon_steps(const FbmPath& path, double t);

}  // namespace fbmvar
