#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "dini/expr.hpp"
#include "dini/linalg.hpp"
#include "dini/map.hpp"
#include "dini/scalar_implicit.hpp"
#include "dini/split_point.hpp"

namespace dini {

struct SystemOptions {
  BoxOptions box;
  SolveOptions solve;
  double tol_sys = 1e-9;
  std::size_t max_depth = 6;
};

/// G(x; z) = F(x; b + J^{-1}(z - b)) with J = dF/dy(a, b), built by substitution
/// into F's trees, so that dG/dz(a; b) is the identity. Returns (G, J^{-1}).
/// Throws SingularMatrix, DimensionMismatch.
std::pair<ExprFunction, Matrix> normalize(const ExprFunction& f, const SplitPoint& seed);

struct ZeroCluster {
  Vector location;
  std::size_t hits = 0;
};

/// Sampling report for local uniqueness of the implicit solution at one x.
/// Samples are drawn in the solver's y-region; those with small residual are
/// polished by Newton steps and the converged zeros clustered. Non-certifying.
struct UniquenessReport {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double tol_sys = 0.0;
  std::size_t near_zero_samples = 0;  // raw samples with |F| <= tol_sys
  std::size_t candidates = 0;         // samples handed to the polisher
  std::vector<ZeroCluster> zeros;
  Vector solver_value;
  double max_deviation = 0.0;  // largest |zero - solver_value|_inf
  bool passed = false;
};

/// The locally unique y = f(x) solving F(x, y) = 0 for y in R^m, built by
/// induction on m: the first normalized equation is solved for z_1 by a scalar
/// implicit solution phi(x, z'), the remaining equations with phi substituted
/// form a system of size m - 1 handled recursively.
///
/// Immutable after build; evaluation is safe from several threads.
class SystemSolution {
 public:
  /// F has seed.m() components in variables (x; y).
  /// Throws SeedNotOnZeroSet, SingularMatrix, BoxNotFound (tagged with level), DimensionMismatch.
  static SystemSolution build(const ExprFunction& f, const SplitPoint& seed, const SystemOptions& options = {});

  std::size_t n() const noexcept;
  std::size_t m() const noexcept;
  std::size_t depth() const noexcept { return m(); }

  /// Throws OutsideBox, NoConvergence (tagged with level).
  Vector solve_at(std::span<const double> x) const;

  /// Jf(x) = -[dF/dy]^{-1} dF/dx at (x, f(x)).
  Matrix jacobian_at(std::span<const double> x) const;

  UniquenessReport verify_uniqueness(std::span<const double> x, std::size_t samples,
                                     std::uint64_t seed = 0) const;

  /// Intersection of the independent boxes of every level.
  std::pair<Vector, Vector> x_box() const;
  bool contains(std::span<const double> x) const;
  /// Axis-aligned bounds of the y-region.
  std::pair<Vector, Vector> y_bounds() const;
  /// Membership in the y-region: per-level dependent intervals mapped through the normalizers.
  bool y_region_contains(std::span<const double> y) const;
  Vector sample_y(std::mt19937_64& rng) const;

  const ExprFunction& function() const noexcept { return f_; }
  const SplitPoint& seed() const noexcept;
  /// J^{-1} of the outermost level (identity for m = 1).
  const Matrix& normalizer() const noexcept;
  const SystemOptions& options() const noexcept { return options_; }

  struct Level;
  /// Scalar solution owned by recursion level `index` (1-based).
  const ImplicitSolution& level_solution(std::size_t index) const;

 private:
  SystemSolution(ExprFunction f, std::shared_ptr<const Level> root, SystemOptions options)
      : f_(std::move(f)), root_(std::move(root)), options_(std::move(options)) {}

  ExprFunction f_;
  std::shared_ptr<const Level> root_;
  SystemOptions options_;
};

}  // namespace dini
