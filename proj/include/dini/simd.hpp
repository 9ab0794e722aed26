#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel kernels over contiguous double arrays. Every table computes
// elementwise results bit-identical to the scalar reference (only IEEE-exact
// operations are vectorized and no FMA contraction is used). Reductions may
// differ from the reference in summation order only.

namespace dini::simd {

struct KernelTable {
  const char* name;

  // out[i] = a[i] op b[i]
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  void (*div)(const double* a, const double* b, double* out, std::size_t n);
  void (*neg)(const double* a, double* out, std::size_t n);
  void (*sqrt)(const double* a, double* out, std::size_t n);
  void (*fill)(double value, double* out, std::size_t n);

  // Dual-number product and quotient:
  //   mul: v = av*bv,  d = av*bd + ad*bv
  //   div: v = av/bv,  d = (ad - v*bd)/bv
  void (*dual_mul)(const double* av, const double* ad, const double* bv, const double* bd,
                   double* ov, double* od, std::size_t n);
  void (*dual_div)(const double* av, const double* ad, const double* bv, const double* bd,
                   double* ov, double* od, std::size_t n);

  // bad[i] |= !isfinite(v[i])
  void (*flag_nonfinite)(const double* v, std::uint8_t* bad, std::size_t n);

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  double (*max_abs)(const double* a, std::size_t n);
  // Number of exact zeros plus number of adjacent pairs with strictly opposite signs.
  std::size_t (*count_sign_changes)(const double* a, std::size_t n);
};

const KernelTable& scalar_kernels();

// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

// Selected once per process: AVX2 when available, otherwise scalar. Setting the
// environment variable DINI_SIMD=scalar forces the reference kernels.
const KernelTable& active();

}  // namespace dini::simd
