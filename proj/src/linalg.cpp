#include "dini/linalg.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "dini/errors.hpp"
#include "dini/simd.hpp"

namespace dini {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("matrix entries must be finite");
  }
}

}  // namespace

Vector operator+(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("vector sum of different dimensions");
  Vector out(a.dim());
  simd::active().add(a.span().data(), b.span().data(), out.span().data(), a.dim());
  return out;
}

Vector operator-(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("vector difference of different dimensions");
  Vector out(a.dim());
  simd::active().sub(a.span().data(), b.span().data(), out.span().data(), a.dim());
  return out;
}

Vector operator*(double s, const Vector& v) {
  Vector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = s * v[i];
  return out;
}

Vector concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return Vector(std::move(out));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot product of different dimensions");
  return simd::active().dot(a.data(), b.data(), a.size());
}

double norm(std::span<const double> v) { return std::sqrt(simd::active().sum_squares(v.data(), v.size())); }

double max_abs(std::span<const double> v) { return simd::active().max_abs(v.data(), v.size()); }

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionMismatch("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw DimensionMismatch("ragged matrix rows");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  require_finite(m.entries());
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void Matrix::set_column(std::size_t j, std::span<const double> values) {
  if (values.size() != rows_) throw DimensionMismatch("column length " + std::to_string(values.size()));
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::columns(std::size_t first, std::size_t count) const {
  if (first + count > cols_) throw DimensionMismatch("column range exceeds " + shape(*this));
  Matrix out(rows_, count);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = (*this)(i, first + j);
  return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("product of " + shape(a) + " and " + shape(b));
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Matrix operator-(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = -a(i, j);
  return out;
}

double hs_norm(const Matrix& m) {
  const auto e = m.entries();
  return std::sqrt(simd::active().sum_squares(e.data(), e.size()));
}

Vector matvec(const Matrix& m, std::span<const double> v) {
  if (m.cols() != v.size()) {
    throw DimensionMismatch("cannot multiply " + shape(m) + " matrix by vector of dimension " +
                            std::to_string(v.size()));
  }
  Vector out(m.rows());
  const auto& k = simd::active();
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = k.dot(m.row(i).data(), v.data(), v.size());
  return out;
}

LuFactorization lu_factor(const Matrix& m) {
  if (!m.square()) throw NotSquare("expected a square matrix, got " + shape(m));
  const std::size_t n = m.rows();
  LuFactorization f{m, std::vector<std::size_t>(n), 1, false, kPivotEps * hs_norm(m)};
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  Matrix& a = f.lu;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::fabs(a(i, k)) > std::fabs(a(p, k))) p = i;
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(f.perm[k], f.perm[p]);
      f.sign = -f.sign;
    }
    const double pivot = a(k, k);
    // A zero matrix has threshold 0; an exact zero pivot is still singular.
    if (std::fabs(pivot) < f.pivot_threshold || pivot == 0.0) f.singular = true;
    if (pivot == 0.0) continue;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = a(i, k) / pivot;
      a(i, k) = factor;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= factor * a(k, j);
    }
  }
  return f;
}

double det(const Matrix& m) {
  const LuFactorization f = lu_factor(m);
  double d = f.sign;
  for (std::size_t i = 0; i < m.rows(); ++i) d *= f.lu(i, i);
  return d;
}

namespace {

Vector lu_solve(const LuFactorization& f, std::span<const double> b) {
  const std::size_t n = f.perm.size();
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[f.perm[i]];
    for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s / f.lu(i, i);
  }
  return x;
}

LuFactorization nonsingular_factor(const Matrix& m) {
  LuFactorization f = lu_factor(m);
  if (f.singular) {
    throw SingularMatrix("matrix " + shape(m) + " is singular (pivot below " +
                         number_text(f.pivot_threshold) + ")");
  }
  return f;
}

}  // namespace

Vector solve(const Matrix& m, std::span<const double> b) {
  if (m.square() && m.rows() != b.size()) {
    throw DimensionMismatch("right-hand side of dimension " + std::to_string(b.size()) + " for " +
                            shape(m) + " system");
  }
  return lu_solve(nonsingular_factor(m), b);
}

Matrix solve(const Matrix& m, const Matrix& b) {
  if (m.square() && m.rows() != b.rows()) {
    throw DimensionMismatch("right-hand side " + shape(b) + " for " + shape(m) + " system");
  }
  const LuFactorization f = nonsingular_factor(m);
  Matrix x(b.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) x.set_column(j, lu_solve(f, b.column(j)).span());
  return x;
}

Matrix inverse(const Matrix& m) {
  if (!m.square()) throw NotSquare("cannot invert " + shape(m) + " matrix");
  return solve(m, Matrix::identity(m.rows()));
}

}  // namespace dini
