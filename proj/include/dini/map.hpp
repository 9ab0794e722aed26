#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "dini/dual.hpp"
#include "dini/expr.hpp"
#include "dini/linalg.hpp"

namespace dini {

/// A C^1 map R^inputs -> R^outputs with exact first derivatives. The implicit
/// solvers work against this interface so that a recursion level can treat
/// the reduced system of the level above (which hides a scalar solve) like
/// any parsed function.
///
/// Implementations are immutable; every method is safe to call concurrently.
class DifferentiableMap {
 public:
  virtual ~DifferentiableMap() = default;

  virtual std::size_t num_inputs() const = 0;
  virtual std::size_t num_outputs() const = 0;

  virtual Vector value(std::span<const double> p) const = 0;
  virtual Matrix jacobian(std::span<const double> p) const = 0;

  virtual double component(std::size_t i, std::span<const double> p) const { return value(p)[i]; }
  /// Value of component i and its derivative along input j.
  virtual Dual component_partial(std::size_t i, std::span<const double> p, std::size_t j) const;

  /// Batched forms. Points where evaluation fails produce NaN.
  virtual void component_batch(std::size_t i, const PointBatch& points, std::span<double> out) const;
  virtual void partial_batch(std::size_t i, const PointBatch& points, std::size_t j,
                             std::span<double> value, std::span<double> derivative) const;
};

using MapPtr = std::shared_ptr<const DifferentiableMap>;

/// Parsed functions; batches run through the SIMD expression evaluator.
class ExprMap final : public DifferentiableMap {
 public:
  explicit ExprMap(ExprFunction f) : f_(std::move(f)) {}

  const ExprFunction& function() const noexcept { return f_; }

  std::size_t num_inputs() const override { return f_.num_variables(); }
  std::size_t num_outputs() const override { return f_.num_components(); }
  Vector value(std::span<const double> p) const override { return f_.eval(p); }
  Matrix jacobian(std::span<const double> p) const override { return f_.jacobian(p); }
  double component(std::size_t i, std::span<const double> p) const override {
    return f_.eval_component(i, p);
  }
  Dual component_partial(std::size_t i, std::span<const double> p, std::size_t j) const override {
    return f_.partial_component(i, p, j);
  }
  void component_batch(std::size_t i, const PointBatch& points, std::span<double> out) const override {
    f_.eval_batch(i, points, out);
  }
  void partial_batch(std::size_t i, const PointBatch& points, std::size_t j, std::span<double> value,
                     std::span<double> derivative) const override {
    f_.partial_batch(i, points, j, value, derivative);
  }

 private:
  ExprFunction f_;
};

MapPtr as_map(ExprFunction f);

/// One output component of `base`, with inputs reordered: input k of the view
/// is input `order[k]` of `base`.
class ComponentView final : public DifferentiableMap {
 public:
  ComponentView(MapPtr base, std::size_t component, std::vector<std::size_t> order);

  std::size_t num_inputs() const override { return order_.size(); }
  std::size_t num_outputs() const override { return 1; }
  Vector value(std::span<const double> p) const override;
  Matrix jacobian(std::span<const double> p) const override;
  double component(std::size_t i, std::span<const double> p) const override;
  Dual component_partial(std::size_t i, std::span<const double> p, std::size_t j) const override;
  void component_batch(std::size_t i, const PointBatch& points, std::span<double> out) const override;
  void partial_batch(std::size_t i, const PointBatch& points, std::size_t j, std::span<double> value,
                     std::span<double> derivative) const override;

 private:
  Vector to_base(std::span<const double> p) const;
  PointBatch to_base(const PointBatch& points) const;

  MapPtr base_;
  std::size_t component_;
  std::vector<std::size_t> order_;
};

/// G(x; z) = F(x; b + J^{-1}(z - b)): the first n inputs pass through, the
/// remaining ones are mapped affinely before reaching `base`.
class AffineReparam final : public DifferentiableMap {
 public:
  AffineReparam(MapPtr base, std::size_t n, Vector center, Matrix transform);

  std::size_t num_inputs() const override { return base_->num_inputs(); }
  std::size_t num_outputs() const override { return base_->num_outputs(); }
  Vector value(std::span<const double> p) const override;
  Matrix jacobian(std::span<const double> p) const override;
  double component(std::size_t i, std::span<const double> p) const override;

 private:
  Vector to_base(std::span<const double> p) const;

  MapPtr base_;
  std::size_t n_;
  Vector center_;
  Matrix transform_;
};

}  // namespace dini
