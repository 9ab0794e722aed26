#pragma once

#include <cstddef>
#include <vector>

#include "dini/expr.hpp"

namespace dini::detail {

/// Tensor grid over a box with `density` points per axis, either including the
/// faces (closed) or strictly inside (open, cell-centred away from the faces).
class TensorGrid {
 public:
  TensorGrid(std::vector<double> lo, std::vector<double> hi, std::size_t density, bool closed)
      : lo_(std::move(lo)), hi_(std::move(hi)), density_(density), closed_(closed) {
    total_ = 1;
    for (std::size_t k = 0; k < lo_.size(); ++k) total_ *= density_;
  }

  std::size_t size() const noexcept { return total_; }
  std::size_t dim() const noexcept { return lo_.size(); }

  double coordinate(std::size_t axis, std::size_t step) const {
    const double w = hi_[axis] - lo_[axis];
    if (closed_) {
      if (density_ == 1) return lo_[axis] + 0.5 * w;
      if (step + 1 == density_) return hi_[axis];
      return lo_[axis] + w * static_cast<double>(step) / static_cast<double>(density_ - 1);
    }
    return lo_[axis] + w * static_cast<double>(step + 1) / static_cast<double>(density_ + 1);
  }

  /// Writes grid point `index` into columns [first, first + dim()) of row `row`.
  void write(std::size_t index, PointBatch& batch, std::size_t row, std::size_t first) const {
    for (std::size_t axis = 0; axis < lo_.size(); ++axis) {
      batch.column(first + axis)[row] = coordinate(axis, index % density_);
      index /= density_;
    }
  }

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::size_t density_;
  bool closed_;
  std::size_t total_ = 1;
};

inline constexpr std::size_t kGridBlock = 4096;

}  // namespace dini::detail
