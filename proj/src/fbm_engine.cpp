#include "fbmvar/fbm_engine.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>

#include "fbmvar/error.hpp"
#include "fbmvar/kernels.hpp"

namespace fbmvar {

// ---------------------------------------------------------------- GridSpec

GridSpec::GridSpec(int level, double spacing, std::int64_t k_min, std::int64_t k_max)
    : level_(level), spacing_(spacing), k_min_(k_min), k_max_(k_max) {}

GridSpec GridSpec::dyadic(int level, double t_min, double t_max) {
  if (level < 1) throw std::invalid_argument("grid level must be a positive integer");
  if (level > 40) throw std::invalid_argument("grid level too fine");
  if (!(t_min <= 0.0) || !(t_max > 0.0)) {
    throw std::invalid_argument("grid must satisfy t_min <= 0 < t_max");
  }
  const double lo = std::ldexp(t_min, level);
  const double hi = std::ldexp(t_max, level);
  if (lo != std::floor(lo) || hi != std::floor(hi)) {
    throw std::invalid_argument("grid endpoints must be multiples of 2^-level");
  }
  if (hi - lo > 1e9) throw std::invalid_argument("grid has too many points");
  return GridSpec(level, std::ldexp(1.0, -level), static_cast<std::int64_t>(lo),
                  static_cast<std::int64_t>(hi));
}

GridSpec GridSpec::uniform(double spacing, std::int64_t k_min, std::int64_t k_max) {
  if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (k_min > 0 || k_max <= 0) throw std::invalid_argument("grid must satisfy k_min <= 0 < k_max");
  if (k_max - k_min > 1'000'000'000) throw std::invalid_argument("grid has too many points");
  int level = -1;
  const int e = std::ilogb(spacing);
  if (std::ldexp(1.0, e) == spacing && e < 0) level = -e;
  return GridSpec(level, spacing, k_min, k_max);
}

// ------------------------------------------------------------ FFTW plumbing

namespace {

struct FftwDeleter {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

ComplexBuffer make_buffer(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (p == nullptr) throw std::bad_alloc();
  return ComplexBuffer(p);
}

// FFTW's planner is not re-entrant; execution of an existing plan on fresh
// (equally aligned) arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan forward_plan(std::size_t n) {
  std::lock_guard lock(planner_mutex());
  static std::map<std::size_t, fftw_plan> plans;
  if (auto it = plans.find(n); it != plans.end()) return it->second;
  ComplexBuffer in = make_buffer(n);
  ComplexBuffer out = make_buffer(n);
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(), FFTW_FORWARD,
                                    FFTW_ESTIMATE);
  if (plan == nullptr) throw Error("FFTW could not create a plan");
  plans.emplace(n, plan);
  return plan;
}

struct Workspace {
  std::size_t size = 0;
  ComplexBuffer in;
  ComplexBuffer out;
  std::vector<double> re;
  std::vector<double> im;

  void ensure(std::size_t n) {
    if (size == n) return;
    in = make_buffer(n);
    out = make_buffer(n);
    re.resize(n);
    im.resize(n);
    size = n;
  }
};

Workspace& thread_workspace() {
  thread_local Workspace ws;
  return ws;
}

std::size_t next_pow2(std::size_t n) { return std::bit_ceil(std::max<std::size_t>(n, 1)); }

}  // namespace

// ------------------------------------------------------------ CirculantFgn

struct CirculantFgn::Impl {
  std::size_t count = 0;
  std::size_t size = 0;  // embedding length L = 2M
  double hurst = 0.5;
  double min_raw = 0.0;
  std::vector<double> eigen;
  std::vector<double> root;  // sqrt(lambda_k / L)
};

CirculantFgn::CirculantFgn(HurstParam h, std::size_t count) : impl_(std::make_unique<Impl>()) {
  if (count < 1) throw std::invalid_argument("fGn count must be positive");
  const std::size_t half = next_pow2(count - 1 == 0 ? 1 : count - 1);
  const std::size_t size = 2 * half;
  impl_->count = count;
  impl_->size = size;
  impl_->hurst = h.value();

  ComplexBuffer row = make_buffer(size);
  ComplexBuffer spec = make_buffer(size);
  for (std::size_t k = 0; k < size; ++k) {
    const std::size_t lag = k <= half ? k : size - k;
    row[k][0] = fgn_correlation(h, static_cast<std::int64_t>(lag));
    row[k][1] = 0.0;
  }
  fftw_execute_dft(forward_plan(size), row.get(), spec.get());

  impl_->eigen.resize(size);
  impl_->root.resize(size);
  double min_raw = spec[0][0];
  for (std::size_t k = 0; k < size; ++k) {
    const double lambda = spec[k][0];
    min_raw = std::min(min_raw, lambda);
    if (lambda < kEigenvalueFloor) throw SpectralError(k, lambda);
    impl_->eigen[k] = std::max(lambda, 0.0);
    impl_->root[k] = std::sqrt(impl_->eigen[k] / static_cast<double>(size));
  }
  impl_->min_raw = min_raw;
}

CirculantFgn::~CirculantFgn() = default;
CirculantFgn::CirculantFgn(CirculantFgn&&) noexcept = default;
CirculantFgn& CirculantFgn::operator=(CirculantFgn&&) noexcept = default;

std::size_t CirculantFgn::count() const noexcept { return impl_->count; }
std::size_t CirculantFgn::embedding_size() const noexcept { return impl_->size; }
std::span<const double> CirculantFgn::eigenvalues() const noexcept { return impl_->eigen; }
double CirculantFgn::min_raw_eigenvalue() const noexcept { return impl_->min_raw; }

void CirculantFgn::sample(Engine& engine, double spacing, std::span<double> out) const {
  if (out.size() != impl_->count) throw std::invalid_argument("output span has the wrong length");
  const std::size_t size = impl_->size;
  Workspace& ws = thread_workspace();
  ws.ensure(size);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < size; ++k) {
    ws.re[k] = normal(engine);
    ws.im[k] = normal(engine);
  }
  kernels::active().spectral_scale(impl_->root.data(), ws.re.data(), ws.im.data(),
                                   reinterpret_cast<double*>(ws.in.get()), size);
  fftw_execute_dft(forward_plan(size), ws.in.get(), ws.out.get());
  const double scale = std::pow(spacing, impl_->hurst);
  for (std::size_t i = 0; i < impl_->count; ++i) out[i] = scale * ws.out[i][0];
}

std::vector<double> sample_fgn_circulant(HurstParam h, std::size_t count, double spacing,
                                         const SeedSpec& seed) {
  if (!(spacing > 0.0)) throw std::invalid_argument("spacing must be positive");
  const CirculantFgn fgn(h, count);
  Engine engine = make_engine(seed);
  std::vector<double> out(count);
  fgn.sample(engine, spacing, out);
  return out;
}

// ------------------------------------------------------------- CholeskyFbm

CholeskyFbm::CholeskyFbm(HurstParam h, const GridSpec& grid, std::size_t cap)
    : h_(h), grid_(grid), dim_(grid.point_count() - 1) {
  if (grid.point_count() > cap) {
    throw std::invalid_argument("grid has " + std::to_string(grid.point_count()) +
                                " points; the dense oracle is capped at " + std::to_string(cap));
  }
  std::vector<double> times;
  times.reserve(dim_);
  for (std::int64_t k = grid.k_min(); k <= grid.k_max(); ++k) {
    if (k != 0) times.push_back(grid.time(k));
  }
  factor_.assign(dim_ * dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = fbm_covariance(h, times[i], times[j]);
      for (std::size_t k = 0; k < j; ++k) s -= factor_[i * dim_ + k] * factor_[j * dim_ + k];
      if (i == j) {
        if (!(s > 0.0)) throw CholeskyError(i + 1, s);
        factor_[i * dim_ + i] = std::sqrt(s);
      } else {
        factor_[i * dim_ + j] = s / factor_[j * dim_ + j];
      }
    }
  }
}

void CholeskyFbm::sample_into(Engine& engine, std::span<double> values) const {
  if (values.size() != grid_.point_count()) throw std::invalid_argument("output span has the wrong length");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(dim_);
  for (double& v : z) v = normal(engine);
  const std::size_t zero = grid_.offset(0);
  std::size_t row = 0;
  for (std::size_t pos = 0; pos < values.size(); ++pos) {
    if (pos == zero) {
      values[pos] = 0.0;
      continue;
    }
    values[pos] = kernels::active().dot(&factor_[row * dim_], z.data(), row + 1);
    ++row;
  }
}

FbmPath CholeskyFbm::sample(const SeedSpec& seed) const {
  FbmPath path{grid_, h_, std::vector<double>(grid_.point_count()), seed};
  Engine engine = make_engine(seed);
  sample_into(engine, path.values);
  return path;
}

FbmPath sample_fbm_cholesky(HurstParam h, const GridSpec& grid, const SeedSpec& seed,
                            std::size_t cap) {
  return CholeskyFbm(h, grid, cap).sample(seed);
}

// -------------------------------------------------------------- FbmSampler

FbmSampler::FbmSampler(HurstParam h, const GridSpec& grid)
    : h_(h), grid_(grid), fgn_(h, grid.point_count() - 1) {}

void FbmSampler::sample_into(Engine& engine, std::span<double> values) const {
  if (values.size() != grid_.point_count()) throw std::invalid_argument("output span has the wrong length");
  values[0] = 0.0;
  fgn_.sample(engine, grid_.spacing(), values.subspan(1));
  for (std::size_t i = 1; i < values.size(); ++i) values[i] += values[i - 1];
  const double anchor = values[grid_.offset(0)];
  for (double& v : values) v -= anchor;
}

FbmPath FbmSampler::sample(const SeedSpec& seed) const {
  FbmPath path{grid_, h_, std::vector<double>(grid_.point_count()), seed};
  Engine engine = make_engine(seed);
  sample_into(engine, path.values);
  return path;
}

FbmPath sample_fbm(HurstParam h, const GridSpec& grid, const SeedSpec& seed) {
  return FbmSampler(h, grid).sample(seed);
}

}  // namespace fbmvar
