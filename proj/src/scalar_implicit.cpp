#include "dini/scalar_implicit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dini/errors.hpp"
#include "dini/simd.hpp"
#include "grid.hpp"

namespace dini {

bool SolutionBox::contains(std::span<const double> x) const {
  if (x.size() != x_lo.dim()) return false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x_lo[k] < x[k] && x[k] < x_hi[k])) return false;
  }
  return true;
}

namespace {

std::string describe(std::span<const double> p) {
  std::string s = "(";
  for (std::size_t k = 0; k < p.size(); ++k) s += (k ? ", " : "") + number_text(p[k]);
  return s + ")";
}

struct Failure {
  Vector point;
  std::string what;
};

// sign * dF/dy > 0 on the closed box.
std::optional<Failure> check_derivative(const DifferentiableMap& f, const Vector& x_lo, const Vector& x_hi,
                                        double y_lo, double y_hi, int sign, std::size_t density) {
  const std::size_t n = x_lo.dim();
  std::vector<double> lo(x_lo.begin(), x_lo.end());
  std::vector<double> hi(x_hi.begin(), x_hi.end());
  lo.push_back(y_lo);
  hi.push_back(y_hi);
  const detail::TensorGrid grid(lo, hi, density, true);

  for (std::size_t begin = 0; begin < grid.size(); begin += detail::kGridBlock) {
    const std::size_t count = std::min(detail::kGridBlock, grid.size() - begin);
    PointBatch batch(n + 1, count);
    for (std::size_t t = 0; t < count; ++t) grid.write(begin + t, batch, t, 0);
    std::vector<double> value(count), deriv(count);
    f.partial_batch(0, batch, n, value, deriv);
    for (std::size_t t = 0; t < count; ++t) {
      if (!(sign * deriv[t] > 0.0)) return Failure{batch.point(t), "dF/dy lost its sign"};
    }
  }
  return std::nullopt;
}

// sign * F(x, y_lo) < 0 < sign * F(x, y_hi) on the open grid over X.
std::optional<Failure> check_endpoints(const DifferentiableMap& f, const Vector& x_lo, const Vector& x_hi,
                                       double y_lo, double y_hi, int sign, std::size_t density) {
  const std::size_t n = x_lo.dim();
  const detail::TensorGrid grid({x_lo.begin(), x_lo.end()}, {x_hi.begin(), x_hi.end()}, density, false);

  for (std::size_t begin = 0; begin < grid.size(); begin += detail::kGridBlock) {
    const std::size_t count = std::min(detail::kGridBlock, grid.size() - begin);
    PointBatch batch(n + 1, 2 * count);
    for (std::size_t t = 0; t < count; ++t) {
      grid.write(begin + t, batch, t, 0);
      grid.write(begin + t, batch, count + t, 0);
      batch.column(n)[t] = y_lo;
      batch.column(n)[count + t] = y_hi;
    }
    std::vector<double> value(2 * count);
    f.component_batch(0, batch, value);
    for (std::size_t t = 0; t < count; ++t) {
      if (!(sign * value[t] < 0.0)) return Failure{batch.point(t), "F(x, y_lo) has the wrong sign"};
      if (!(sign * value[count + t] > 0.0)) return Failure{batch.point(count + t), "F(x, y_hi) has the wrong sign"};
    }
  }
  return std::nullopt;
}

}  // namespace

SolutionBox find_box(const ExprFunction& f, const SplitPoint& seed, const BoxOptions& options) {
  return find_box(as_map(f), seed, options);
}

SolutionBox find_box(const MapPtr& f, const SplitPoint& seed, const BoxOptions& options) {
  const std::size_t n = seed.n();
  if (seed.m() != 1 || f->num_outputs() != 1 || f->num_inputs() != n + 1) {
    throw DimensionMismatch("scalar implicit problem needs one equation in n + 1 variables");
  }
  if (options.grid_density == 0) throw std::invalid_argument("grid_density must be positive");
  const Vector p = seed.joined();
  const double b = seed.y[0];

  const Dual at_seed = f->component_partial(0, p.span(), n);
  if (!(std::fabs(at_seed.value) <= options.tol_seed)) {
    throw SeedNotOnZeroSet("|F(a, b)| = " + number_text(std::fabs(at_seed.value)) + " exceeds " +
                           number_text(options.tol_seed));
  }
  if (!(std::fabs(at_seed.derivative) > 1e-12)) {
    throw DegenerateDerivative("dF/dy(a, b) = " + number_text(at_seed.derivative));
  }
  const int sign = at_seed.derivative > 0.0 ? 1 : -1;

  Vector hx(n, options.half_width);
  if (!options.x_half_widths.empty()) {
    if (options.x_half_widths.size() != n) throw DimensionMismatch("x_half_widths needs one entry per axis");
    hx = Vector(options.x_half_widths);
  }
  double hy = options.y_half_width.value_or(options.half_width);

  SolutionBox box;
  box.sign = sign;
  box.grid_density = options.grid_density;
  auto place = [&] {
    box.x_lo = seed.x - hx;
    box.x_hi = seed.x + hx;
    box.y_lo = b - hy;
    box.y_hi = b + hy;
  };
  auto give_up = [&](const Failure& fail) {
    throw BoxNotFound("no monotonicity box after " + std::to_string(box.shrink_steps) + " halvings; " +
                      fail.what + " at " + describe(fail.point.span()));
  };

  // Derivative sign on the closed box: shrink every axis.
  for (;;) {
    place();
    const auto fail = check_derivative(*f, box.x_lo, box.x_hi, box.y_lo, box.y_hi, sign, options.grid_density);
    if (!fail) break;
    if (box.shrink_steps == options.max_shrink) give_up(*fail);
    hx = 0.5 * hx;
    hy *= 0.5;
    ++box.shrink_steps;
  }
  // Endpoint signs over X: the dependent interval stays, X shrinks.
  for (;;) {
    place();
    const auto fail = check_endpoints(*f, box.x_lo, box.x_hi, box.y_lo, box.y_hi, sign, options.grid_density);
    if (!fail) break;
    if (box.shrink_steps == options.max_shrink) give_up(*fail);
    hx = 0.5 * hx;
    ++box.shrink_steps;
  }
  box.validated = true;
  return box;
}

ImplicitSolution ImplicitSolution::build(const ExprFunction& f, const SplitPoint& seed,
                                         const ImplicitOptions& options) {
  return build(as_map(f), seed, options);
}

ImplicitSolution ImplicitSolution::build(MapPtr f, const SplitPoint& seed, const ImplicitOptions& options) {
  SolutionBox box = find_box(f, seed, options.box);
  return ImplicitSolution(std::move(f), seed, std::move(box), options.solve);
}

double ImplicitSolution::oriented(std::span<const double> x, double y) const {
  Vector p(x.size() + 1);
  std::copy(x.begin(), x.end(), p.span().begin());
  p[x.size()] = y;
  return box_.sign * f_->component(0, p.span());
}

double ImplicitSolution::solve_at(std::span<const double> x) const {
  if (x.size() != n()) {
    throw DimensionMismatch("expected " + std::to_string(n()) + " independent values, got " +
                            std::to_string(x.size()));
  }
  if (!box_.contains(x)) throw OutsideBox("x = " + describe(x) + " is outside the validated box");

  double lo = box_.y_lo;
  double hi = box_.y_hi;
  if (!(oriented(x, lo) < 0.0 && oriented(x, hi) > 0.0)) {
    throw NoConvergence("endpoint signs fail at x = " + describe(x) + "; box validation missed this point");
  }
  for (std::size_t iter = 0; iter < solve_.max_iter; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    const double v = oriented(x, mid);
    if (v == 0.0 || std::fabs(v) <= solve_.tol_root) return mid;
    if (v < 0.0) {
      lo = mid;
    } else if (v > 0.0) {
      hi = mid;
    } else {
      throw NoConvergence("F is not finite at y = " + number_text(mid));
    }
    if (hi - lo <= solve_.tol_root) return lo + 0.5 * (hi - lo);
  }
  throw NoConvergence("bisection exceeded " + std::to_string(solve_.max_iter) + " iterations at x = " +
                      describe(x));
}

Vector ImplicitSolution::gradient_at(std::span<const double> x) const {
  const double y = solve_at(x);
  const Matrix jac = f_->jacobian(concat(x, std::span<const double>(&y, 1)).span());
  const double dy = jac(0, n());
  Vector grad(n());
  for (std::size_t j = 0; j < n(); ++j) grad[j] = -jac(0, j) / dy;
  return grad;
}

SignScan ImplicitSolution::uniqueness_scan(std::span<const double> x, std::size_t samples) const {
  SignScan scan;
  scan.samples = samples;
  scan.solver_value = solve_at(x);
  if (samples < 2) return scan;

  PointBatch batch(n() + 1, samples);
  std::vector<double> ys(samples);
  for (std::size_t t = 0; t < samples; ++t) {
    ys[t] = t + 1 == samples
                ? box_.y_hi
                : box_.y_lo + (box_.y_hi - box_.y_lo) * static_cast<double>(t) / static_cast<double>(samples - 1);
    for (std::size_t k = 0; k < n(); ++k) batch.column(k)[t] = x[k];
    batch.column(n())[t] = ys[t];
  }
  std::vector<double> values(samples);
  f_->component_batch(0, batch, values);
  scan.sign_changes = simd::active().count_sign_changes(values.data(), samples);

  for (std::size_t t = 0; t < samples; ++t) {
    if (values[t] == 0.0) scan.roots.push_back(ys[t]);
    if (t + 1 == samples) break;
    const bool flip = (values[t] < 0.0 && values[t + 1] > 0.0) || (values[t] > 0.0 && values[t + 1] < 0.0);
    if (!flip) continue;
    // Bisect the crossing to machine resolution.
    double lo = ys[t], hi = ys[t + 1];
    const double s = values[t] < 0.0 ? 1.0 : -1.0;
    for (;;) {
      const double mid = lo + 0.5 * (hi - lo);
      if (mid <= lo || mid >= hi) break;
      const double v = s * oriented(x, mid) * box_.sign;
      if (v == 0.0) {
        lo = hi = mid;
        break;
      }
      (v < 0.0 ? lo : hi) = mid;
    }
    scan.roots.push_back(lo + 0.5 * (hi - lo));
  }
  scan.passed = scan.sign_changes == 1 && scan.roots.size() == 1 &&
                std::fabs(scan.roots.front() - scan.solver_value) <= 10.0 * solve_.tol_root;
  return scan;
}

}  // namespace dini
