#pragma once

#include <cmath>

namespace dini {

/// First-order forward-mode dual number value + derivative*eps, eps^2 = 0.
///
/// The elementwise rules below are shared verbatim by the batch evaluator so
/// pointwise and batched derivatives agree bit for bit.
struct Dual {
  double value = 0.0;
  double derivative = 0.0;

  static constexpr Dual constant(double v) { return {v, 0.0}; }
  static constexpr Dual variable(double v) { return {v, 1.0}; }
};

inline Dual operator+(Dual a, Dual b) { return {a.value + b.value, a.derivative + b.derivative}; }
inline Dual operator-(Dual a, Dual b) { return {a.value - b.value, a.derivative - b.derivative}; }
inline Dual operator-(Dual a) { return {-a.value, -a.derivative}; }
inline Dual operator*(Dual a, Dual b) {
  return {a.value * b.value, a.value * b.derivative + a.derivative * b.value};
}
inline Dual operator/(Dual a, Dual b) {
  const double v = a.value / b.value;
  return {v, (a.derivative - v * b.derivative) / b.value};
}

namespace dual_rules {

inline Dual sin(Dual a) { return {std::sin(a.value), std::cos(a.value) * a.derivative}; }
inline Dual cos(Dual a) { return {std::cos(a.value), -std::sin(a.value) * a.derivative}; }
inline Dual exp(Dual a) {
  const double v = std::exp(a.value);
  return {v, v * a.derivative};
}
inline Dual ln(Dual a) {
  return {std::log(a.value), a.derivative == 0.0 ? 0.0 : a.derivative / a.value};
}

// A zero seed gives a zero derivative even where the function has no
// derivative (sqrt at 0), so partials along unrelated variables stay finite.
inline double sqrt_derivative(double value, double derivative) {
  return derivative == 0.0 ? 0.0 : derivative / (2.0 * value);
}
inline Dual sqrt(Dual a) {
  const double v = std::sqrt(a.value);
  return {v, sqrt_derivative(v, a.derivative)};
}

// abs'(0) = 0.
inline Dual abs(Dual a) {
  const double s = a.value > 0.0 ? 1.0 : (a.value < 0.0 ? -1.0 : 0.0);
  return {std::fabs(a.value), s * a.derivative};
}

inline Dual pow(Dual a, Dual b) {
  const double v = std::pow(a.value, b.value);
  double d = 0.0;
  if (b.derivative == 0.0) {
    if (a.derivative != 0.0) d = b.value * std::pow(a.value, b.value - 1.0) * a.derivative;
  } else {
    const double base_term = a.derivative == 0.0 ? 0.0 : b.value * a.derivative / a.value;
    d = v * (b.derivative * std::log(a.value) + base_term);
  }
  return {v, d};
}

}  // namespace dual_rules

}  // namespace dini
