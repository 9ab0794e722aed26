#include "dini/inverse.hpp"

#include <algorithm>
#include <string>

#include "dini/errors.hpp"

namespace dini {

ExprFunction inverse_lift(const ExprFunction& f) {
  const std::size_t n = f.num_variables();
  if (f.num_components() != n) {
    throw NotSquare("inverse needs as many components as variables, got " + std::to_string(f.num_components()) +
                    " and " + std::to_string(n));
  }
  const auto& xs = f.variables();
  auto taken = [&](const std::string& name) { return std::find(xs.begin(), xs.end(), name) != xs.end(); };
  std::string prefix = "y";
  for (bool clash = true; clash;) {
    clash = false;
    for (std::size_t i = 0; i < n && !clash; ++i) clash = taken(prefix + std::to_string(i + 1));
    if (clash) prefix = "_" + prefix;
  }

  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i + 1));
  names.insert(names.end(), xs.begin(), xs.end());

  std::vector<NodePtr> shifted;
  for (std::size_t k = 0; k < n; ++k) shifted.push_back(Node::variable(n + k));
  const ExprFunction moved = f.substitute(shifted, names);

  std::vector<NodePtr> trees;
  for (std::size_t i = 0; i < n; ++i) trees.push_back(Node::binary(Op::Sub, moved.tree(i), Node::variable(i)));
  return ExprFunction::from_trees(std::move(trees), std::move(names));
}

LocalInverse LocalInverse::build(const ExprFunction& f, const Vector& p, const SystemOptions& options) {
  ExprFunction phi = inverse_lift(f);
  if (p.dim() != f.num_variables()) throw DimensionMismatch("seed dimension does not match F");
  if (lu_factor(f.jacobian(p.span())).singular) throw SingularMatrix("JF(p) is singular");
  Vector q = f.eval(p.span());
  SystemSolution system = SystemSolution::build(phi, SplitPoint{q, p}, options);
  return LocalInverse(f, p, std::move(q), std::move(system));
}

Vector LocalInverse::invert_at(std::span<const double> y) const { return system_.solve_at(y); }

Matrix LocalInverse::inverse_jacobian_at(std::span<const double> y) const {
  return inverse(f_.jacobian(invert_at(y).span()));
}

Matrix LocalInverse::implicit_jacobian_at(std::span<const double> y) const { return system_.jacobian_at(y); }

}  // namespace dini
