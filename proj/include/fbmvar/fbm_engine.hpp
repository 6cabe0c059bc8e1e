#pragma once

// Exact Gaussian synthesis of fractional Gaussian noise and (two-sided)
// fractional Brownian motion on uniform grids.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fbmvar/gaussian_calculus.hpp"
#include "fbmvar/rng.hpp"

namespace fbmvar {

/// Uniform grid {k * spacing : k_min <= k <= k_max} with k_min <= 0 < k_max.
/// Dyadic grids (spacing 2^-level) are the common case; the spatial grids
/// of the Brownian-time construction use spacing 2^{-n/2}.
class GridSpec {
 public:
  /// Dyadic grid at `level`; t_min and t_max must be multiples of 2^-level.
  static GridSpec dyadic(int level, double t_min, double t_max);
  static GridSpec uniform(double spacing, std::int64_t k_min, std::int64_t k_max);

  /// Dyadic level, or -1 for a non-dyadic spacing.
  int level() const noexcept { return level_; }
  double spacing() const noexcept { return spacing_; }
  std::int64_t k_min() const noexcept { return k_min_; }
  std::int64_t k_max() const noexcept { return k_max_; }
  double t_min() const noexcept { return static_cast<double>(k_min_) * spacing_; }
  double t_max() const noexcept { return static_cast<double>(k_max_) * spacing_; }
  std::size_t point_count() const noexcept { return static_cast<std::size_t>(k_max_ - k_min_ + 1); }
  /// Storage offset of grid index k (so zero sits at offset -k_min).
  std::size_t offset(std::int64_t k) const noexcept { return static_cast<std::size_t>(k - k_min_); }
  double time(std::int64_t k) const noexcept { return static_cast<double>(k) * spacing_; }
  bool contains(std::int64_t k) const noexcept { return k >= k_min_ && k <= k_max_; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  GridSpec(int level, double spacing, std::int64_t k_min, std::int64_t k_max);
  int level_;
  double spacing_;
  std::int64_t k_min_;
  std::int64_t k_max_;
};

/// Path values on a grid, pinned to exactly 0 at t = 0.
struct FbmPath {
  GridSpec grid;
  HurstParam h;
  std::vector<double> values;  // values[grid.offset(k)] = X(k * spacing)
  SeedSpec seed;

  double at_index(std::int64_t k) const { return values[grid.offset(k)]; }
  /// Values for indices 0..k_max (the nonnegative half).
  std::span<const double> forward() const {
    return std::span<const double>(values).subspan(grid.offset(0));
  }
};

/// Caps for the dense oracle.
inline constexpr std::size_t kDefaultCholeskyCap = 2048;
/// Eigenvalues below this abort the circulant embedding.
inline constexpr double kEigenvalueFloor = -1e-9;

/// Davies-Harte sampler for `count` fGn values with unit spacing, reusable
/// across draws. Eigenvalues are computed once at construction.
class CirculantFgn {
 public:
  CirculantFgn(HurstParam h, std::size_t count);
  ~CirculantFgn();
  CirculantFgn(CirculantFgn&&) noexcept;
  CirculantFgn& operator=(CirculantFgn&&) noexcept;

  std::size_t count() const noexcept;
  std::size_t embedding_size() const noexcept;
  /// Circulant eigenvalues after clamping tiny negatives to zero.
  std::span<const double> eigenvalues() const noexcept;
  /// Smallest eigenvalue before clamping.
  double min_raw_eigenvalue() const noexcept;

  /// Writes `count` draws scaled to grid `spacing` into `out`.
  void sample(Engine& engine, double spacing, std::span<double> out) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<double> sample_fgn_circulant(HurstParam h, std::size_t count, double spacing,
                                         const SeedSpec& seed);

/// Dense Cholesky oracle for fBm on a small grid; grid point t = 0 is
/// excluded from the factorization and pinned to 0.
class CholeskyFbm {
 public:
  CholeskyFbm(HurstParam h, const GridSpec& grid, std::size_t cap = kDefaultCholeskyCap);

  const GridSpec& grid() const noexcept { return grid_; }
  FbmPath sample(const SeedSpec& seed) const;
  void sample_into(Engine& engine, std::span<double> values) const;

 private:
  HurstParam h_;
  GridSpec grid_;
  std::size_t dim_;
  std::vector<double> factor_;  // row-major lower triangle, dim_ x dim_
};

FbmPath sample_fbm_cholesky(HurstParam h, const GridSpec& grid, const SeedSpec& seed,
                            std::size_t cap = kDefaultCholeskyCap);

/// Two-sided fBm from one stationary fGn stream spanning [t_min, t_max],
/// cumulatively summed and re-anchored at t = 0.
class FbmSampler {
 public:
  FbmSampler(HurstParam h, const GridSpec& grid);

  const GridSpec& grid() const noexcept { return grid_; }
  FbmPath sample(const SeedSpec& seed) const;
  void sample_into(Engine& engine, std::span<double> values) const;

 private:
  HurstParam h_;
  GridSpec grid_;
  CirculantFgn fgn_;
};

FbmPath sample_fbm(HurstParam h, const GridSpec& grid, const SeedSpec& seed);

}  // namespace fbmvar
