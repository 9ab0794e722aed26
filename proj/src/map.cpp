#include "dini/map.hpp"

#include <cmath>
#include <string>

#include "dini/errors.hpp"

namespace dini {

Dual DifferentiableMap::component_partial(std::size_t i, std::span<const double> p, std::size_t j) const {
  const Matrix jac = jacobian(p);
  return {component(i, p), jac(i, j)};
}

void DifferentiableMap::component_batch(std::size_t i, const PointBatch& points, std::span<double> out) const {
  for (std::size_t t = 0; t < points.count(); ++t) {
    try {
      const double v = component(i, points.point(t).span());
      out[t] = std::isfinite(v) ? v : std::nan("");
    } catch (const Error&) {
      out[t] = std::nan("");
    }
  }
}

void DifferentiableMap::partial_batch(std::size_t i, const PointBatch& points, std::size_t j,
                                      std::span<double> value, std::span<double> derivative) const {
  for (std::size_t t = 0; t < points.count(); ++t) {
    try {
      const Dual d = component_partial(i, points.point(t).span(), j);
      const bool ok = std::isfinite(d.value) && std::isfinite(d.derivative);
      value[t] = ok ? d.value : std::nan("");
      derivative[t] = ok ? d.derivative : std::nan("");
    } catch (const Error&) {
      value[t] = std::nan("");
      derivative[t] = std::nan("");
    }
  }
}

MapPtr as_map(ExprFunction f) { return std::make_shared<const ExprMap>(std::move(f)); }

// ---------------------------------------------------------------------------

ComponentView::ComponentView(MapPtr base, std::size_t component, std::vector<std::size_t> order)
    : base_(std::move(base)), component_(component), order_(std::move(order)) {
  if (order_.size() != base_->num_inputs() || component_ >= base_->num_outputs()) {
    throw DimensionMismatch("component view does not match the underlying map");
  }
  std::vector<bool> seen(order_.size(), false);
  for (std::size_t k : order_) {
    if (k >= seen.size() || seen[k]) throw DimensionMismatch("component view order is not a permutation");
    seen[k] = true;
  }
}

Vector ComponentView::to_base(std::span<const double> p) const {
  if (p.size() != order_.size()) throw DimensionMismatch("expected " + std::to_string(order_.size()) + " inputs");
  Vector q(order_.size());
  for (std::size_t k = 0; k < order_.size(); ++k) q[order_[k]] = p[k];
  return q;
}

PointBatch ComponentView::to_base(const PointBatch& points) const {
  PointBatch q(points.dim(), points.count());
  for (std::size_t k = 0; k < order_.size(); ++k) {
    const auto src = points.column(k);
    std::copy(src.begin(), src.end(), q.column(order_[k]).begin());
  }
  return q;
}

Vector ComponentView::value(std::span<const double> p) const { return Vector{component(0, p)}; }

double ComponentView::component(std::size_t, std::span<const double> p) const {
  return base_->component(component_, to_base(p).span());
}

Matrix ComponentView::jacobian(std::span<const double> p) const {
  const Matrix full = base_->jacobian(to_base(p).span());
  Matrix out(1, order_.size());
  for (std::size_t k = 0; k < order_.size(); ++k) out(0, k) = full(component_, order_[k]);
  return out;
}

Dual ComponentView::component_partial(std::size_t, std::span<const double> p, std::size_t j) const {
  return base_->component_partial(component_, to_base(p).span(), order_[j]);
}

void ComponentView::component_batch(std::size_t, const PointBatch& points, std::span<double> out) const {
  base_->component_batch(component_, to_base(points), out);
}

void ComponentView::partial_batch(std::size_t, const PointBatch& points, std::size_t j, std::span<double> value,
                                  std::span<double> derivative) const {
  base_->partial_batch(component_, to_base(points), order_[j], value, derivative);
}

// ---------------------------------------------------------------------------

AffineReparam::AffineReparam(MapPtr base, std::size_t n, Vector center, Matrix transform)
    : base_(std::move(base)), n_(n), center_(std::move(center)), transform_(std::move(transform)) {
  const std::size_t m = center_.dim();
  if (n_ + m != base_->num_inputs() || transform_.rows() != m || transform_.cols() != m) {
    throw DimensionMismatch("affine reparametrization does not match the underlying map");
  }
}

Vector AffineReparam::to_base(std::span<const double> p) const {
  if (p.size() != num_inputs()) throw DimensionMismatch("expected " + std::to_string(num_inputs()) + " inputs");
  const std::size_t m = center_.dim();
  Vector q(p);
  Vector shift(m);
  for (std::size_t k = 0; k < m; ++k) shift[k] = p[n_ + k] - center_[k];
  const Vector moved = matvec(transform_, shift.span());
  for (std::size_t k = 0; k < m; ++k) q[n_ + k] = center_[k] + moved[k];
  return q;
}

Vector AffineReparam::value(std::span<const double> p) const { return base_->value(to_base(p).span()); }

double AffineReparam::component(std::size_t i, std::span<const double> p) const {
  return base_->component(i, to_base(p).span());
}

Matrix AffineReparam::jacobian(std::span<const double> p) const {
  const Matrix inner = base_->jacobian(to_base(p).span());
  const std::size_t m = center_.dim();
  Matrix out = inner;
  const Matrix dy = inner.columns(n_, m) * transform_;
  for (std::size_t i = 0; i < inner.rows(); ++i)
    for (std::size_t k = 0; k < m; ++k) out(i, n_ + k) = dy(i, k);
  return out;
}

}  // namespace dini
