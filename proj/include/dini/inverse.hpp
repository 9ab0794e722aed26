#pragma once

#include <span>

#include "dini/expr.hpp"
#include "dini/implicit_system.hpp"
#include "dini/linalg.hpp"

namespace dini {

/// Local inverse G of a square map F near p, obtained as the implicit solution
/// x = G(y) of Phi(y; x) = F(x) - y = 0 seeded at (F(p); p). The independent
/// block of the underlying system is y, the dependent block is x.
class LocalInverse {
 public:
  /// Throws NotSquare, SingularMatrix, and whatever SystemSolution::build throws.
  static LocalInverse build(const ExprFunction& f, const Vector& p, const SystemOptions& options = {});

  /// x = G(y). Throws OutsideBox, NoConvergence.
  Vector invert_at(std::span<const double> y) const;

  /// JF(G(y))^{-1}.
  Matrix inverse_jacobian_at(std::span<const double> y) const;
  /// The same matrix through the implicit-system formula -[dPhi/dx]^{-1} dPhi/dy.
  Matrix implicit_jacobian_at(std::span<const double> y) const;

  /// Validated box of admissible y.
  std::pair<Vector, Vector> y_box() const { return system_.x_box(); }
  bool contains(std::span<const double> y) const { return system_.contains(y); }

  const ExprFunction& function() const noexcept { return f_; }
  /// Phi in variables (y; x).
  const ExprFunction& lifted() const noexcept { return system_.function(); }
  const SystemSolution& system() const noexcept { return system_; }
  const Vector& p() const noexcept { return p_; }
  const Vector& q() const noexcept { return q_; }

 private:
  LocalInverse(ExprFunction f, Vector p, Vector q, SystemSolution system)
      : f_(std::move(f)), p_(std::move(p)), q_(std::move(q)), system_(std::move(system)) {}

  ExprFunction f_;
  Vector p_;
  Vector q_;
  SystemSolution system_;
};

/// Phi(y; x) = F(x) - y as an expression in variables (y_1..y_n; x_1..x_n).
ExprFunction inverse_lift(const ExprFunction& f);

}  // namespace dini
