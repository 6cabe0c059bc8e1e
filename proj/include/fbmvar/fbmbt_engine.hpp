#pragma once

// Fractional Brownian motion in Brownian time, Z_t = X(Y_t), observed on the
// stopping-time grid where Y moves between neighbours of 2^{-n/2} Z.
//
// Only the embedded walk S_k = 2^{n/2} Y(T_{k,n}) is simulated. Its law is
// exactly that of a simple symmetric random walk; the hitting times
// themselves never enter any statistic, so they are not generated.

#include <cstdint>
#include <vector>

#include "fbmvar/fbm_engine.hpp"
#include "fbmvar/rng.hpp"
#include "fbmvar/weight_function.hpp"

namespace fbmvar {

struct EmbeddedWalk {
  int level = 0;
  std::vector<int> steps;        // each +1 or -1
  std::vector<std::int64_t> s;   // s[0] = 0, s[k+1] = s[k] + steps[k]
  SeedSpec seed;

  std::size_t length() const noexcept { return steps.size(); }
  std::int64_t min() const;
  std::int64_t max() const;
  /// Y(T_{k,n}) = 2^{-n/2} S_k.
  double position(std::size_t k) const;
};

/// floor(2^n t), rejecting negative or non-finite t.
std::int64_t walk_horizon(int n, double t);

/// Walk with floor(2^n t) i.i.d. Rademacher steps.
EmbeddedWalk sample_walk(int n, double t, const SeedSpec& seed);
/// Walk from explicit steps (each must be +1 or -1).
EmbeddedWalk walk_from_steps(int n, std::vector<int> steps);

/// Up- and downcrossings of the spatial intervals [j, j+1] (in walk units)
/// during the first K steps.
struct CrossingCounts {
  int level = 0;
  std::int64_t horizon = 0;  // K
  std::int64_t j_min = 0;    // counts cover j_min <= j < j_min + up.size()
  std::vector<std::int64_t> up;
  std::vector<std::int64_t> down;

  std::int64_t u(std::int64_t j) const;
  std::int64_t d(std::int64_t j) const;
  std::int64_t total() const;
};

CrossingCounts crossing_counts(const EmbeddedWalk& walk, double t);
/// S at the horizon floor(2^n t).
std::int64_t jstar(const EmbeddedWalk& walk, double t);
/// Net crossings U_j - D_j predicted from j* alone: 1 on [0, j*), -1 on [j*, 0).
int net_crossing_indicator(std::int64_t j, std::int64_t jstar);

/// Spatial spacing 2^{-n/2}.
double spatial_spacing(int n);

/// A walk together with an independent two-sided fBm X on the spatial grid
/// 2^{-n/2} Z covering the walk's range.
struct FbmbtSample {
  EmbeddedWalk walk;
  FbmPath path;
  std::vector<double> z;  // z[k] = X(2^{-n/2} S_k)
};

/// Walk stream from seed.for_role(role::walk), path stream from
/// seed.for_role(role::path).
FbmbtSample sample_fbmbt(HurstParam h, int n, double t, const SeedSpec& seed);
/// Pairs a given walk with a given spatial path (checked for coverage).
FbmbtSample make_fbmbt(EmbeddedWalk walk, FbmPath path);

/// V_n(f,t) = sum_{k < floor(2^n t)} 1/2 (f(Z_k) + f(Z_{k+1})) (2^{nH/2}(Z_{k+1} - Z_k))^{2r-1}.
double vn_direct(const FbmbtSample& sample, const WeightFunction& f, int r, double t);
/// The same quantity as a sum over spatial intervals weighted by U_j - D_j.
double vn_crossing(const FbmbtSample& sample, const WeightFunction& f, int r, double t);

/// W_n with a signed spatial index J: for J >= 0 the trapezoid-weighted sum
/// over [0, J) of forward increments; for J < 0 the same over the mirrored
/// grid X^-_j = X(-j 2^{-n/2}), j in [0, -J).
double wn_index(const FbmPath& path, const WeightFunction& f, int r, int n, std::int64_t J);
/// Midpoint-weighted analog of wn_index.
double mn_index(const FbmPath& path, const WeightFunction& f, int r, int n, std::int64_t J);

/// Time-argument forms; t is snapped to the spatial grid (rounded when
/// within 1e-9 of a grid point, otherwise truncated toward zero).
double wn(const FbmPath& path, const WeightFunction& f, int r, int n, double t);
double mn(const FbmPath& path, const WeightFunction& f, int r, int n, double t);
std::int64_t spatial_index(int n, double t);

}  // namespace fbmvar
