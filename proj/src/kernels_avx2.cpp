// Compiled with -mavx2 and no FMA so element-wise results match the scalar
// reference exactly. Only called after a CPUID check.
#include <immintrin.h>

#include "fbmvar/kernels.hpp"

namespace fbmvar::kernels {

namespace {

void weighted_odd_power(const double* inc, const double* w, double scale, int power, double* out,
                        std::size_t n) {
  const int squarings = (power - 1) / 2;
  const __m256d vs = _mm256_set1_pd(scale);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d y = _mm256_mul_pd(vs, _mm256_loadu_pd(inc + j));
    const __m256d y2 = _mm256_mul_pd(y, y);
    __m256d p = y;
    for (int k = 0; k < squarings; ++k) p = _mm256_mul_pd(p, y2);
    _mm256_storeu_pd(out + j, _mm256_mul_pd(_mm256_loadu_pd(w + j), p));
  }
  for (; j < n; ++j) {
    const double y = scale * inc[j];
    const double y2 = y * y;
    double p = y;
    for (int k = 0; k < squarings; ++k) p = p * y2;
    out[j] = w[j] * p;
  }
}

void forward_difference(const double* v, double* out, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    _mm256_storeu_pd(out + j, _mm256_sub_pd(_mm256_loadu_pd(v + j + 1), _mm256_loadu_pd(v + j)));
  }
  for (; j < n; ++j) out[j] = v[j + 1] - v[j];
}

void pairwise_mean(const double* v, double* out, std::size_t n) {
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d s = _mm256_add_pd(_mm256_loadu_pd(v + j), _mm256_loadu_pd(v + j + 1));
    _mm256_storeu_pd(out + j, _mm256_mul_pd(half, s));
  }
  for (; j < n; ++j) out[j] = 0.5 * (v[j] + v[j + 1]);
}

void spectral_scale(const double* s, const double* a, const double* b, double* out,
                    std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d vs = _mm256_loadu_pd(s + k);
    const __m256d ra = _mm256_mul_pd(vs, _mm256_loadu_pd(a + k));
    const __m256d rb = _mm256_mul_pd(vs, _mm256_loadu_pd(b + k));
    // interleave (a0 b0 a1 b1 | a2 b2 a3 b3)
    const __m256d lo = _mm256_unpacklo_pd(ra, rb);  // a0 b0 a2 b2
    const __m256d hi = _mm256_unpackhi_pd(ra, rb);  // a1 b1 a3 b3
    _mm256_storeu_pd(out + 2 * k, _mm256_permute2f128_pd(lo, hi, 0x20));
    _mm256_storeu_pd(out + 2 * k + 4, _mm256_permute2f128_pd(lo, hi, 0x31));
  }
  for (; k < n; ++k) {
    out[2 * k] = s[k] * a[k];
    out[2 * k + 1] = s[k] * b[k];
  }
}

void outer_accumulate(const double* x, std::size_t n, double* acc) {
  for (std::size_t i = 0; i < n; ++i) {
    double* row = acc + i * (i + 1) / 2;
    const double xi = x[i];
    const __m256d vxi = _mm256_set1_pd(xi);
    const std::size_t len = i + 1;
    std::size_t j = 0;
    for (; j + 4 <= len; j += 4) {
      const __m256d prod = _mm256_mul_pd(vxi, _mm256_loadu_pd(x + j));
      _mm256_storeu_pd(row + j, _mm256_add_pd(_mm256_loadu_pd(row + j), prod));
    }
    for (; j < len; ++j) row[j] += xi * x[j];
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + j + 4), _mm256_loadu_pd(b + j + 4)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; j < n; ++j) s += a[j] * b[j];
  return s;
}

}  // namespace

namespace detail {
const KernelTable avx2_table{Isa::avx2,     weighted_odd_power, forward_difference, pairwise_mean,
                             spectral_scale, outer_accumulate,   dot};
}  // namespace detail

}  // namespace fbmvar::kernels
