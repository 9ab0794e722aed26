#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace dini {

/// A point or direction of R^n.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}
  explicit Vector(std::span<const double> values) : data_(values.begin(), values.end()) {}

  std::size_t dim() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  operator std::span<const double>() const noexcept { return data_; }

  const std::vector<double>& values() const noexcept { return data_; }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& v);

/// Concatenation (a; b).
Vector concat(std::span<const double> a, std::span<const double> b);

double dot(std::span<const double> a, std::span<const double> b);
/// Euclidean norm |v|.
double norm(std::span<const double> v);
double max_abs(std::span<const double> v);

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  Vector column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);

  std::span<const double> entries() const noexcept { return data_; }

  Matrix transpose() const;
  /// Columns [first, first + count).
  Matrix columns(std::size_t first, std::size_t count) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a);

/// Hilbert-Schmidt (Frobenius) norm: sqrt of the sum of squared entries.
double hs_norm(const Matrix& m);

Vector matvec(const Matrix& m, std::span<const double> v);

/// Singular pivots are those with magnitude below kPivotEps * hs_norm(M).
inline constexpr double kPivotEps = 1e-12;

/// PA = LU with partial pivoting. L has unit diagonal; both factors are packed
/// into `lu`. `perm[i]` is the source row of row i of PA.
struct LuFactorization {
  Matrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;
  double pivot_threshold = 0.0;
};

LuFactorization lu_factor(const Matrix& m);

/// Throws NotSquare. Never throws on singular input; returns the product of pivots.
double det(const Matrix& m);

/// Throws NotSquare, DimensionMismatch, SingularMatrix.
Vector solve(const Matrix& m, std::span<const double> b);
/// Solves M X = B column by column.
Matrix solve(const Matrix& m, const Matrix& b);
Matrix inverse(const Matrix& m);

}  // namespace dini
