#pragma once

#include "dini/linalg.hpp"

namespace dini {

/// A point (x, y) of R^n x R^m: x holds the independent variables, y the dependent ones.
struct SplitPoint {
  Vector x;
  Vector y;

  std::size_t n() const noexcept { return x.dim(); }
  std::size_t m() const noexcept { return y.dim(); }
  Vector joined() const { return concat(x, y); }
};

}  // namespace dini
