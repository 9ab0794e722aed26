// Compiled with -mavx2 only (no -mfma): every lane performs the same IEEE
// operation as the scalar reference.

#include "dini/simd.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

namespace dini::simd {
namespace {

template <class Op>
inline void binary(const double* a, const double* b, double* out, std::size_t n, Op op) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, op(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) {
    const __m256d r = op(_mm256_set1_pd(a[i]), _mm256_set1_pd(b[i]));
    out[i] = _mm256_cvtsd_f64(r);
  }
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_add_pd(x, y); });
}
void sub(const double* a, const double* b, double* out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_sub_pd(x, y); });
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_mul_pd(x, y); });
}
void div(const double* a, const double* b, double* out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_div_pd(x, y); });
}

void neg(const double* a, double* out, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_xor_pd(_mm256_loadu_pd(a + i), sign));
  for (; i < n; ++i) out[i] = -a[i];
}

void sqrt_(const double* a, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_sqrt_pd(_mm256_loadu_pd(a + i)));
  for (; i < n; ++i) out[i] = std::sqrt(a[i]);
}

void fill(double value, double* out, std::size_t n) {
  const __m256d v = _mm256_set1_pd(value);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, v);
  for (; i < n; ++i) out[i] = value;
}

void dual_mul(const double* av, const double* ad, const double* bv, const double* bd, double* ov,
              double* od, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(av + i);
    const __m256d da = _mm256_loadu_pd(ad + i);
    const __m256d b = _mm256_loadu_pd(bv + i);
    const __m256d db = _mm256_loadu_pd(bd + i);
    const __m256d v = _mm256_mul_pd(a, b);
    const __m256d d = _mm256_add_pd(_mm256_mul_pd(a, db), _mm256_mul_pd(da, b));
    _mm256_storeu_pd(ov + i, v);
    _mm256_storeu_pd(od + i, d);
  }
  for (; i < n; ++i) {
    const double v = av[i] * bv[i];
    const double d = av[i] * bd[i] + ad[i] * bv[i];
    ov[i] = v;
    od[i] = d;
  }
}

void dual_div(const double* av, const double* ad, const double* bv, const double* bd, double* ov,
              double* od, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(av + i);
    const __m256d da = _mm256_loadu_pd(ad + i);
    const __m256d b = _mm256_loadu_pd(bv + i);
    const __m256d db = _mm256_loadu_pd(bd + i);
    const __m256d v = _mm256_div_pd(a, b);
    const __m256d d = _mm256_div_pd(_mm256_sub_pd(da, _mm256_mul_pd(v, db)), b);
    _mm256_storeu_pd(ov + i, v);
    _mm256_storeu_pd(od + i, d);
  }
  for (; i < n; ++i) {
    const double v = av[i] / bv[i];
    const double d = (ad[i] - v * bd[i]) / bv[i];
    ov[i] = v;
    od[i] = d;
  }
}

void flag_nonfinite(const double* v, std::uint8_t* bad, std::size_t n) {
  // x - x is 0 for finite x and NaN for inf/NaN.
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(v + i);
    const int finite = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_sub_pd(x, x), zero, _CMP_EQ_OQ));
    for (int k = 0; k < 4; ++k) bad[i + k] |= static_cast<std::uint8_t>(((finite >> k) & 1) == 0);
  }
  for (; i < n; ++i) bad[i] |= static_cast<std::uint8_t>(!std::isfinite(v[i]));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* a, std::size_t n) { return dot(a, a, n); }

double max_abs(const double* a, std::size_t n) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d m = _mm256_setzero_pd();
  __m256d nan_seen = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_and_pd(_mm256_loadu_pd(a + i), mask);
    nan_seen = _mm256_or_pd(nan_seen, _mm256_cmp_pd(x, x, _CMP_UNORD_Q));
    m = _mm256_max_pd(m, x);
  }
  if (_mm256_movemask_pd(nan_seen) != 0) return std::nan("");
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = lanes[0];
  for (int k = 1; k < 4; ++k) r = lanes[k] > r ? lanes[k] : r;
  for (; i < n; ++i) {
    const double v = std::fabs(a[i]);
    if (std::isnan(v)) return v;
    if (v > r) r = v;
  }
  return r;
}

std::size_t count_sign_changes(const double* a, std::size_t n) {
  std::size_t count = 0;
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  // Vector body covers pairs (i, i+1) for i + 4 < n.
  for (; i + 5 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(a + i);
    const __m256d y = _mm256_loadu_pd(a + i + 1);
    const __m256d xneg = _mm256_cmp_pd(x, zero, _CMP_LT_OQ);
    const __m256d xpos = _mm256_cmp_pd(x, zero, _CMP_GT_OQ);
    const __m256d yneg = _mm256_cmp_pd(y, zero, _CMP_LT_OQ);
    const __m256d ypos = _mm256_cmp_pd(y, zero, _CMP_GT_OQ);
    const __m256d flip = _mm256_or_pd(_mm256_and_pd(xneg, ypos), _mm256_and_pd(xpos, yneg));
    const __m256d zeros = _mm256_cmp_pd(x, zero, _CMP_EQ_OQ);
    count += static_cast<std::size_t>(__builtin_popcount(_mm256_movemask_pd(flip)));
    count += static_cast<std::size_t>(__builtin_popcount(_mm256_movemask_pd(zeros)));
  }
  for (; i < n; ++i) {
    if (a[i] == 0.0) ++count;
    if (i + 1 < n && ((a[i] < 0.0 && a[i + 1] > 0.0) || (a[i] > 0.0 && a[i + 1] < 0.0))) ++count;
  }
  return count;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{
      "avx2", add, sub,         mul,     div,        neg,          sqrt_, fill, dual_mul, dual_div,
      flag_nonfinite, dot, sum_squares, max_abs, count_sign_changes,
  };
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &table : nullptr;
}

}  // namespace dini::simd

#else

namespace dini::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace dini::simd

#endif
