#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dini/dual.hpp"
#include "dini/linalg.hpp"
#include "dini/simd.hpp"
#include "dini/split_point.hpp"

namespace dini {

enum class Op { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Ln, Sqrt, Abs };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Immutable expression tree node. Subtrees may be shared.
struct Node {
  Op op = Op::Constant;
  double value = 0.0;     // Constant
  std::size_t var = 0;    // Variable
  NodePtr lhs, rhs;       // operands; unary ops use lhs

  static NodePtr constant(double v);
  static NodePtr variable(std::size_t index);
  static NodePtr unary(Op op, NodePtr operand);
  static NodePtr binary(Op op, NodePtr lhs, NodePtr rhs);
};

/// Structural equality (same shape, ops, constants bit-equal, variable indices).
bool same_tree(const Node& a, const Node& b);

/// Points stored variable-major: column(k) holds coordinate k of every point.
class PointBatch {
 public:
  PointBatch(std::size_t dim, std::size_t count) : dim_(dim), count_(count), data_(dim * count) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return count_; }
  std::span<double> column(std::size_t k) { return {data_.data() + k * count_, count_}; }
  std::span<const double> column(std::size_t k) const { return {data_.data() + k * count_, count_}; }
  void set(std::size_t i, std::span<const double> point);
  Vector point(std::size_t i) const;

 private:
  std::size_t dim_;
  std::size_t count_;
  std::vector<double> data_;
};

/// A parsed vector-valued function of named variables.
///
/// Grammar: + - * / ^ (right associative, binds tighter than unary minus),
/// unary minus, parentheses, numeric literals, declared variables, and the
/// functions sin cos exp ln sqrt abs. Derivatives come from one forward-mode
/// dual pass per seeded direction.
///
/// Immutable after construction and safe to evaluate from several threads.
class ExprFunction {
 public:
  /// Throws SyntaxError, UnknownIdentifier.
  static ExprFunction parse(const std::vector<std::string>& components,
                            std::vector<std::string> variables);
  static ExprFunction from_trees(std::vector<NodePtr> components, std::vector<std::string> variables);

  std::size_t num_components() const noexcept;
  std::size_t num_variables() const noexcept;
  const std::vector<std::string>& variables() const noexcept;
  /// Original text, or the printed trees for functions built programmatically.
  const std::vector<std::string>& source_text() const noexcept;
  const NodePtr& tree(std::size_t component) const;

  /// Canonical text; parse(print()) reproduces the tree for parsed input.
  std::string print(std::size_t component) const;

  /// Throws DimensionMismatch, DomainError.
  Vector eval(std::span<const double> p) const;
  double eval_component(std::size_t component, std::span<const double> p) const;

  /// d F / d x_var (0-based), exact to roundoff.
  Vector partial(std::span<const double> p, std::size_t var) const;
  Dual partial_component(std::size_t component, std::span<const double> p, std::size_t var) const;
  /// Directional derivative dF(p)[direction].
  Vector directional(std::span<const double> p, std::span<const double> direction) const;
  Matrix jacobian(std::span<const double> p) const;

  /// Batched evaluation; points where any intermediate is not finite yield NaN.
  /// `kernels` defaults to simd::active().
  void eval_batch(std::size_t component, const PointBatch& points, std::span<double> out,
                  const simd::KernelTable* kernels = nullptr) const;
  void partial_batch(std::size_t component, const PointBatch& points, std::size_t var,
                     std::span<double> value, std::span<double> derivative,
                     const simd::KernelTable* kernels = nullptr) const;

  /// Replaces variable k by `replacements[k]`, whose variable indices refer to `new_variables`.
  ExprFunction substitute(const std::vector<NodePtr>& replacements,
                          std::vector<std::string> new_variables) const;

 private:
  struct Impl;
  explicit ExprFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// Free-function forms.
inline ExprFunction parse(const std::vector<std::string>& components, std::vector<std::string> variables) {
  return ExprFunction::parse(components, std::move(variables));
}
inline Vector eval(const ExprFunction& f, std::span<const double> p) { return f.eval(p); }
inline Vector partial(const ExprFunction& f, std::span<const double> p, std::size_t var) {
  return f.partial(p, var);
}
inline Matrix jacobian(const ExprFunction& f, std::span<const double> p) { return f.jacobian(p); }

/// (dF/dx, dF/dy) at a split point. Throws DimensionMismatch unless F has
/// p.n() + p.m() variables and p.m() components.
std::pair<Matrix, Matrix> jacobian_split(const ExprFunction& f, const SplitPoint& p);

/// Builds v_j -> offset_j + sum_k A_jk (u_k - center_k) replacement trees for
/// every variable of a function, in terms of `A.cols()` new variables.
std::vector<NodePtr> affine_replacements(std::span<const double> offset, const Matrix& a,
                                         std::span<const double> center);

}  // namespace dini
