#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "fbmvar/kernels.hpp"

namespace fbmvar::kernels {

namespace {

void weighted_odd_power(const double* inc, const double* w, double scale, int power, double* out,
                        std::size_t n) {
  const int squarings = (power - 1) / 2;
  for (std::size_t j = 0; j < n; ++j) {
    const double y = scale * inc[j];
    const double y2 = y * y;
    double p = y;
    for (int k = 0; k < squarings; ++k) p = p * y2;
    out[j] = w[j] * p;
  }
}

void forward_difference(const double* v, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) out[j] = v[j + 1] - v[j];
}

void pairwise_mean(const double* v, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) out[j] = 0.5 * (v[j] + v[j + 1]);
}

void spectral_scale(const double* s, const double* a, const double* b, double* out,
                    std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    out[2 * k] = s[k] * a[k];
    out[2 * k + 1] = s[k] * b[k];
  }
}

void outer_accumulate(const double* x, std::size_t n, double* acc) {
  for (std::size_t i = 0; i < n; ++i) {
    double* row = acc + i * (i + 1) / 2;
    const double xi = x[i];
    for (std::size_t j = 0; j <= i; ++j) row[j] += xi * x[j];
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += a[j] * b[j];
  return s;
}

Isa select_isa() noexcept {
  if (const char* env = std::getenv("FBMVAR_ISA"); env != nullptr && std::strcmp(env, "scalar") == 0) {
    return Isa::scalar;
  }
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::scalar,   weighted_odd_power, forward_difference, pairwise_mean,
                               spectral_scale, outer_accumulate,   dot};
}  // namespace detail

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!isa_available(isa)) throw std::invalid_argument("instruction set not available on this CPU");
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::avx2) return detail::avx2_table;
#endif
  return detail::scalar_table;
}

const KernelTable& active() {
  static const KernelTable& chosen = table(select_isa());
  return chosen;
}

}  // namespace fbmvar::kernels
