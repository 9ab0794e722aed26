#pragma once

// Test systems F(x, y) = 0 with hand-coded twins of each expression, so the
// Newton oracle never touches the library evaluator.

#include <cmath>
#include <string>
#include <vector>

#include "dini/implicit_system.hpp"
#include "support/oracles.hpp"

namespace corpus {

struct System {
  std::string name;
  std::vector<std::string> functions;
  std::vector<std::string> variables;
  std::size_t n;
  std::vector<double> seed;
  oracle::Field field;
  dini::SystemOptions options;
};

inline dini::SplitPoint split(const System& s) {
  std::vector<double> x(s.seed.begin(), s.seed.begin() + static_cast<std::ptrdiff_t>(s.n));
  std::vector<double> y(s.seed.begin() + static_cast<std::ptrdiff_t>(s.n), s.seed.end());
  return {dini::Vector(x), dini::Vector(y)};
}

inline System circle() {
  System s{"circle", {"x^2 + y^2 - 1"}, {"x", "y"}, 1, {0, 1},
           [](const oracle::Vec& x, const oracle::Vec& y) { return oracle::Vec{x[0] * x[0] + y[0] * y[0] - 1}; },
           {}};
  s.options.box.half_width = 0.8;
  return s;
}

inline System quadratic_pair() {
  return {"quadratic pair",
          {"y1^2 + y2 - x - 1", "y1 + y2^2 - x - 1"},
          {"x", "y1", "y2"},
          1,
          {1, 1, 1},
          [](const oracle::Vec& x, const oracle::Vec& y) {
            return oracle::Vec{y[0] * y[0] + y[1] - x[0] - 1, y[0] + y[1] * y[1] - x[0] - 1};
          },
          {}};
}

inline System sine_cubic() {
  return {"sine cubic",
          {"sin(x1) + y^3 + y - x2"},
          {"x1", "x2", "y"},
          2,
          {0, 0, 0},
          [](const oracle::Vec& x, const oracle::Vec& y) {
            return oracle::Vec{std::sin(x[0]) + y[0] * y[0] * y[0] + y[0] - x[1]};
          },
          {}};
}

inline System lambert() {
  return {"product exponential",
          {"y * exp(y) - x"},
          {"x", "y"},
          1,
          {0, 0},
          [](const oracle::Vec& x, const oracle::Vec& y) { return oracle::Vec{y[0] * std::exp(y[0]) - x[0]}; },
          {}};
}

inline System exp_sine_pair() {
  return {"exponential sine pair",
          {"exp(y1) - 1 + y2 - x1", "y1 - 2*sin(y2) - x2*x1"},
          {"x1", "x2", "y1", "y2"},
          2,
          {0, 0, 0, 0},
          [](const oracle::Vec& x, const oracle::Vec& y) {
            return oracle::Vec{std::exp(y[0]) - 1 + y[1] - x[0], y[0] - 2 * std::sin(y[1]) - x[1] * x[0]};
          },
          {}};
}

inline System mixed_triple() {
  return {"mixed triple",
          {"y1 + y2^2 + y3 - x", "y1*y2 + y3^3 + 2*y2 - 2*x", "exp(y3) - 1 + 2*y1 - y2 - x*y1"},
          {"x", "y1", "y2", "y3"},
          1,
          {0, 0, 0, 0},
          [](const oracle::Vec& x, const oracle::Vec& y) {
            return oracle::Vec{y[0] + y[1] * y[1] + y[2] - x[0], y[0] * y[1] + y[2] * y[2] * y[2] + 2 * y[1] - 2 * x[0],
                               std::exp(y[2]) - 1 + 2 * y[0] - y[1] - x[0] * y[0]};
          },
          {}};
}

inline std::vector<System> all() {
  return {circle(), quadratic_pair(), sine_cubic(), lambert(), exp_sine_pair(), mixed_triple()};
}

/// At least `count` points strictly inside the x-box, spread over `fraction` of it.
inline std::vector<dini::Vector> interior_grid(const dini::SystemSolution& s, std::size_t count,
                                               double fraction = 0.8) {
  auto [lo, hi] = s.x_box();
  const std::size_t n = lo.dim();
  std::size_t per_axis = 1;
  while (static_cast<std::size_t>(std::pow(static_cast<double>(per_axis), static_cast<double>(n))) < count) ++per_axis;
  std::vector<dini::Vector> out;
  std::size_t total = static_cast<std::size_t>(std::pow(static_cast<double>(per_axis), static_cast<double>(n)));
  for (std::size_t flat = 0; flat < total; ++flat) {
    dini::Vector p(n);
    std::size_t rest = flat;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t i = rest % per_axis;
      rest /= per_axis;
      double mid = 0.5 * (lo[k] + hi[k]);
      double half = 0.5 * (hi[k] - lo[k]) * fraction;
      p[k] = per_axis == 1 ? mid : mid - half + 2 * half * static_cast<double>(i) / static_cast<double>(per_axis - 1);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace corpus
