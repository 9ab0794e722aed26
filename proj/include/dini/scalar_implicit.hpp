#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dini/expr.hpp"
#include "dini/linalg.hpp"
#include "dini/map.hpp"
#include "dini/split_point.hpp"

namespace dini {

struct BoxOptions {
  /// Initial half-width of every axis.
  double half_width = 0.5;
  /// Per-axis initial half-widths for the independent block; overrides `half_width` when set.
  std::vector<double> x_half_widths;
  /// Initial half-width of the dependent interval; `half_width` when unset.
  std::optional<double> y_half_width;
  std::size_t grid_density = 9;
  std::size_t max_shrink = 40;
  double tol_seed = 1e-10;
};

struct SolveOptions {
  double tol_root = 1e-12;
  std::size_t max_iter = 200;
};

struct ImplicitOptions {
  BoxOptions box;
  SolveOptions solve;
};

/// X x [y_lo, y_hi] with X = ]x_lo, x_hi[ open. When validated, sign * dF/dy > 0
/// on every grid point of the closed box and sign * F(x, y_lo) < 0 < sign * F(x, y_hi)
/// on every grid point of X.
struct SolutionBox {
  Vector x_lo;
  Vector x_hi;
  double y_lo = 0.0;
  double y_hi = 0.0;
  int sign = 1;
  std::size_t grid_density = 0;
  std::size_t shrink_steps = 0;
  bool validated = false;

  /// Strict membership in the open box X.
  bool contains(std::span<const double> x) const;
};

/// Throws SeedNotOnZeroSet, DegenerateDerivative, BoxNotFound, DimensionMismatch.
///
/// The search first halves every half-width until the derivative sign holds on
/// the closed box, then halves only the independent half-widths until the
/// endpoint signs hold, with at most `max_shrink` halvings overall.
SolutionBox find_box(const ExprFunction& f, const SplitPoint& seed, const BoxOptions& options = {});
SolutionBox find_box(const MapPtr& f, const SplitPoint& seed, const BoxOptions& options = {});

/// Sign-change scan of y -> F(x, y) over the dependent interval.
struct SignScan {
  std::size_t samples = 0;
  std::size_t sign_changes = 0;
  std::vector<double> roots;  // each crossing refined by bisection
  double solver_value = 0.0;
  bool passed = false;        // exactly one crossing, matching the solver within 10 tol_root
};

/// The locally unique y = f(x) solving F(x, y) = 0 near a seed, for scalar F.
class ImplicitSolution {
 public:
  /// F must have one output and seed.n() + 1 inputs ordered (x, y).
  static ImplicitSolution build(const ExprFunction& f, const SplitPoint& seed,
                                const ImplicitOptions& options = {});
  static ImplicitSolution build(MapPtr f, const SplitPoint& seed, const ImplicitOptions& options = {});

  /// Monotone bisection on [y_lo, y_hi]. Throws OutsideBox, NoConvergence.
  double solve_at(std::span<const double> x) const;

  /// df/dx_j = -(dF/dx_j) / (dF/dy) at (x, f(x)).
  Vector gradient_at(std::span<const double> x) const;

  SignScan uniqueness_scan(std::span<const double> x, std::size_t samples = 10000) const;

  const SolutionBox& box() const noexcept { return box_; }
  const SplitPoint& seed() const noexcept { return seed_; }
  const MapPtr& function() const noexcept { return f_; }
  const SolveOptions& options() const noexcept { return solve_; }
  std::size_t n() const noexcept { return seed_.n(); }

 private:
  ImplicitSolution(MapPtr f, SplitPoint seed, SolutionBox box, SolveOptions solve)
      : f_(std::move(f)), seed_(std::move(seed)), box_(std::move(box)), solve_(solve) {}

  double oriented(std::span<const double> x, double y) const;

  MapPtr f_;
  SplitPoint seed_;
  SolutionBox box_;
  SolveOptions solve_;
};

}  // namespace dini
