#include <cmath>

#include "dini/simd.hpp"

namespace dini::simd {
namespace {

void add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}
void sub(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}
void div(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] / b[i];
}
void neg(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = -a[i];
}
void sqrt_(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::sqrt(a[i]);
}
void fill(double value, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = value;
}

void dual_mul(const double* av, const double* ad, const double* bv, const double* bd, double* ov,
              double* od, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = av[i] * bv[i];
    const double d = av[i] * bd[i] + ad[i] * bv[i];
    ov[i] = v;
    od[i] = d;
  }
}

void dual_div(const double* av, const double* ad, const double* bv, const double* bd, double* ov,
              double* od, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = av[i] / bv[i];
    const double d = (ad[i] - v * bd[i]) / bv[i];
    ov[i] = v;
    od[i] = d;
  }
}

void flag_nonfinite(const double* v, std::uint8_t* bad, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) bad[i] |= static_cast<std::uint8_t>(!std::isfinite(v[i]));
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* a, std::size_t n) { return dot(a, a, n); }

double max_abs(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(a[i]);
    if (v > m || std::isnan(v)) m = v;
    if (std::isnan(m)) return m;
  }
  return m;
}

std::size_t count_sign_changes(const double* a, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == 0.0) ++count;
    if (i + 1 < n && ((a[i] < 0.0 && a[i + 1] > 0.0) || (a[i] > 0.0 && a[i + 1] < 0.0))) ++count;
  }
  return count;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar", add,  sub,         mul,     div,        neg,          sqrt_, fill, dual_mul, dual_div,
      flag_nonfinite, dot, sum_squares, max_abs, count_sign_changes,
  };
  return table;
}

}  // namespace dini::simd
