#pragma once

// Exact scalar kernels: Hermite polynomials, Gaussian moments, fBm covariance,
// fGn correlation, the odd-power variance constant sigma_r and the two
// inner-product sums over dyadic grids.

#include <cstdint>
#include <vector>

namespace fbmvar {

/// Hurst index in the open interval (0, 1).
class HurstParam {
 public:
  explicit HurstParam(double h);

  double value() const noexcept { return h_; }
  /// True iff H < 1/2 (negatively correlated increments).
  bool subdiffusive() const noexcept { return h_ < 0.5; }

  friend bool operator==(const HurstParam&, const HurstParam&) = default;

 private:
  double h_;
};

/// Probabilists' Hermite polynomial He_p(x), with He_0 = 1.
double hermite_eval(int p, double x);

/// Coefficients of x^{2r-1} = sum_u c[u] He_{2(r-u)+1}(x), u = 1..r.
struct HermiteCoeffs {
  int r = 0;
  std::vector<std::uint64_t> exact;  // exact[u-1] = c_{u,r}
  std::vector<double> c;             // same values as doubles

  /// Hermite degree paired with coefficient u (1-based): 2(r-u)+1.
  static constexpr int degree(int r, int u) noexcept { return 2 * (r - u) + 1; }
};

/// Throws OverflowError when an intermediate product leaves uint64 range.
HermiteCoeffs hermite_coeffs(int r);

/// k! in exact arithmetic; OverflowError past 20!.
std::uint64_t factorial_exact(int k);

/// E[N^p] for N standard normal: (p-1)!! for even p, 0 for odd p.
double gaussian_moment(int p);
/// Exact integer version of gaussian_moment; OverflowError when out of range.
std::uint64_t gaussian_moment_exact(int p);

/// C_H(s,t) = 1/2 (|s|^{2H} + |t|^{2H} - |t-s|^{2H}), two-sided.
double fbm_covariance(HurstParam h, double s, double t);

/// Correlation of unit-spacing fGn at lag j: 1/2(|j+1|^{2H} - 2|j|^{2H} + |j-1|^{2H}).
double fgn_correlation(HurstParam h, std::int64_t j);

/// E[(UV)^{2r-1}] for standard bivariate normals with correlation rho,
/// expanded through Hermite orthogonality.
double bivariate_odd_moment(int r, double rho);

struct SigmaR {
  int r = 0;
  double h = 0.0;
  double value = 0.0;       // sigma_r
  double value_sq = 0.0;    // sigma_r^2 after clamping
  double tail_bound = 0.0;  // certified bound on the truncation error of value_sq
  std::int64_t terms = 0;   // lags summed explicitly
};

struct SigmaOptions {
  double tol = 1e-10;
  /// Strict mode rejects H >= 1/2.
  bool strict = true;
  std::int64_t max_terms = std::int64_t{1} << 26;
};

/// sigma_r from the lag series. The degree-one chaos is summed in closed
/// form (partial sums of rho_H telescope); higher chaoses are summed
/// explicitly up to a lag J whose tail is certified below `tol`.
SigmaR sigma_r(int r, HurstParam h, const SigmaOptions& opts = {});

/// One row of the lag series behind sigma_r, for diagnostics.
struct SigmaTerm {
  std::int64_t lag;
  double rho;
  double moment;  // bivariate_odd_moment(r, rho)
};
std::vector<SigmaTerm> sigma_r_terms(int r, HurstParam h, std::int64_t count);

/// Sum over j in [floor(2^n s), floor(2^n t)) of |<d_j, eps~_j>| by direct
/// covariance evaluation. Requires 0 <= s < t.
double lemma27_sum(HurstParam h, int n, double s, double t);
/// Telescoped closed form of lemma27_sum:
/// 1/2 2^{-2nH} (floor(2^n t)^{2H} - floor(2^n s)^{2H}).
double lemma27_closed_form(HurstParam h, int n, double s, double t);
/// Displayed bound 1/2 2^{-2nH} (floor(2^n t) - floor(2^n s))^{2H}; equals
/// the closed form when floor(2^n s) = 0 and dominates it otherwise.
double lemma27_displayed_bound(HurstParam h, int n, double s, double t);

/// Sum_{j < floor(2^n T)} |<d_{j 2^-n}, eps~_{k(j) 2^-m}>|, k(j) = floor(j 2^{m-n}).
/// Requires n > m >= 2 and H < 1/2.
double lemma26_sum(HurstParam h, int n, int m, double T);

}  // namespace fbmvar
