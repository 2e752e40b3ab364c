// Compiled with -mavx2 -mfma. Only reached through the dispatcher after a
// cpuid check, so nothing here may be inlined into baseline code.

#include <immintrin.h>

#include <algorithm>
#include <cassert>
#include <limits>

#include "flatpoly/kernels.hpp"

namespace flatpoly::kernels::avx2 {

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y.data() + i);
    __m256d y1 = _mm256_loadu_pd(y.data() + i + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i + 4), y1);
    _mm256_storeu_pd(y.data() + i, y0);
    _mm256_storeu_pd(y.data() + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d y0 = _mm256_loadu_pd(y.data() + i);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i), y0);
    _mm256_storeu_pd(y.data() + i, y0);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

namespace {
inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sw));
}

inline __m256d horner4(std::span<const double> c, __m256d s) {
  __m256d v = _mm256_set1_pd(c.back());
  for (std::size_t i = c.size() - 1; i-- > 0;) v = _mm256_fmadd_pd(v, s, _mm256_set1_pd(c[i]));
  return v;
}
}  // namespace

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + i + 4), _mm256_loadu_pd(y.data() + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double poly_grid_max(std::span<const double> coeffs, double s0, double ds, std::size_t count) {
  if (count == 0) return -std::numeric_limits<double>::infinity();
  if (coeffs.empty()) return 0.0;
  // Grid points are formed as s0 + j*ds exactly like the scalar path so both
  // variants sample identical abscissae.
  const __m256d vs0 = _mm256_set1_pd(s0);
  const __m256d vds = _mm256_set1_pd(ds);
  const __m256d lane = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  __m256d best = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) {
    const __m256d idx = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(j)), lane);
    const __m256d s = _mm256_add_pd(vs0, _mm256_mul_pd(idx, vds));
    best = _mm256_max_pd(best, horner4(coeffs, s));
  }
  double out = hmax(best);
  for (; j < count; ++j) {
    const double s = s0 + static_cast<double>(j) * ds;
    double v = coeffs.back();
    for (std::size_t i = coeffs.size() - 1; i-- > 0;) v = v * s + coeffs[i];
    out = std::max(out, v);
  }
  return out;
}

void poly_eval(std::span<const double> coeffs, std::span<const double> s, std::span<double> out) {
  assert(s.size() == out.size());
  if (coeffs.empty()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  std::size_t j = 0;
  for (; j + 4 <= s.size(); j += 4) {
    _mm256_storeu_pd(out.data() + j, horner4(coeffs, _mm256_loadu_pd(s.data() + j)));
  }
  for (; j < s.size(); ++j) {
    double v = coeffs.back();
    for (std::size_t i = coeffs.size() - 1; i-- > 0;) v = v * s[j] + coeffs[i];
    out[j] = v;
  }
}

}  // namespace flatpoly::kernels::avx2
