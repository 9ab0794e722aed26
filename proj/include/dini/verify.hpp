#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dini/expr.hpp"
#include "dini/linalg.hpp"

namespace dini {

// Runnable checks of the preliminary lemmas behind the implicit and inverse
// function solvers. Random checks take an explicit seed and echo it in the
// report; none of them certifies anything.

struct OperatorBoundReport {
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double hs_norm = 0.0;
  double max_ratio = 0.0;  // max |Mv| / (hs_norm(M) |v|), 0 for the zero matrix
  bool passed = false;     // max_ratio <= 1 + 1e-12
};

OperatorBoundReport check_operator_bound(const Matrix& m, std::size_t trials, std::uint64_t seed = 0);

struct ChainRuleReport {
  std::size_t samples = 0;
  double max_discrepancy = 0.0;
  bool passed = false;  // max_discrepancy <= 1e-10
};

/// Compares the Jacobian of the substituted expression G(x) = F(y + Mx) with
/// JF(y + Mx) M at every sample. Throws DimensionMismatch.
ChainRuleReport check_chain_rule(const ExprFunction& f, const Matrix& m, std::span<const double> y,
                                 const std::vector<Vector>& x_samples);

struct WitnessReport {
  bool found = false;
  double t = 0.0;
  Vector witness;  // a + t (b - a)
  double residual = 0.0;
  std::size_t samples_used = 0;
};

struct MvtOptions {
  std::size_t grid = 1024;
  double tol = 1e-10;
};

/// Point c on [a, b] with F(b) - F(a) = <grad F(c), b - a> for scalar F.
/// Throws NoSignChange when the grid misses every crossing.
WitnessReport mvt_witness(const ExprFunction& f, std::span<const double> a, std::span<const double> b,
                          const MvtOptions& options = {});

struct InjectivityOptions {
  double initial_radius = 0.5;
  std::size_t tuples = 2000;  // mixed-row determinant samples per radius
  std::size_t pairs = 2000;   // direct F(a) != F(b) checks per radius
  std::uint64_t seed = 0;
  double min_radius = 1e-8;
};

struct InjectivityReport {
  double radius = 0.0;
  std::uint64_t seed = 0;
  std::size_t halvings = 0;
  std::size_t tuples = 0;
  std::size_t pairs = 0;
  int det_sign = 0;
  double min_abs_det = 0.0;           // over the accepted radius' tuples
  double min_separation_ratio = 0.0;  // min |F(a) - F(b)| / |a - b|
  bool bliss_passed = false;
  bool pairwise_passed = false;
  bool certifying = false;  // sampling only
};

/// Largest r = r0 / 2^k for which sampled mixed-row Jacobians (row i at its own
/// point of B(p; r)) keep the sign of det JF(p) and sampled pairs stay apart.
/// Throws NotSquare, DegenerateJacobian, RadiusUnderflow.
InjectivityReport injectivity_radius(const ExprFunction& f, std::span<const double> p,
                                     const InjectivityOptions& options = {});

}  // namespace dini
