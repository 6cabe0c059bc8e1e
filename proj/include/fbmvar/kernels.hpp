#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference in
// kernels_scalar.cpp and, on x86-64, an AVX2 variant in kernels_avx2.cpp.
// Element-wise kernels perform the same IEEE operation sequence in both
// variants and agree bit-for-bit; reductions (dot) agree to rounding.
//
// The variant is picked once at startup from CPUID. Setting the environment
// variable FBMVAR_ISA=scalar forces the reference path.

#include <cstddef>
#include <string_view>

namespace fbmvar::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;
bool isa_available(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  /// out[j] = w[j] * (scale * inc[j])^power for odd power >= 1.
  void (*weighted_odd_power)(const double* inc, const double* w, double scale, int power,
                             double* out, std::size_t n);
  /// out[j] = v[j+1] - v[j] for j < n (v holds n+1 values).
  void (*forward_difference)(const double* v, double* out, std::size_t n);
  /// out[j] = 0.5 * (v[j] + v[j+1]) for j < n.
  void (*pairwise_mean)(const double* v, double* out, std::size_t n);
  /// Interleaved complex out[k] = (s[k] a[k], s[k] b[k]).
  void (*spectral_scale)(const double* s, const double* a, const double* b, double* out,
                         std::size_t n);
  /// Packed lower triangle: acc[i(i+1)/2 + j] += x[i] x[j] for j <= i.
  void (*outer_accumulate)(const double* x, std::size_t n, double* acc);
  double (*dot)(const double* a, const double* b, std::size_t n);
};

const KernelTable& table(Isa isa);
/// Table selected for this process.
const KernelTable& active();

namespace detail {
extern const KernelTable scalar_table;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace fbmvar::kernels
