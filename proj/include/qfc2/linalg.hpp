#pragma once

// Dense linear algebra over a field from fields.hpp.

#include <optional>
#include <vector>

#include "qfc2/fields.hpp"

namespace qfc2 {

using Vec = std::vector<Value>;

Vec zero_vec(Field f, size_t n);
Vec unit_vec(Field f, size_t n, size_t i);
Vec add(const Vec& a, const Vec& b);
Vec scale(const Vec& a, const Value& c);
Value dot(const Vec& a, const Vec& b);
bool is_zero(const Vec& a);

class Matrix {
 public:
  Matrix() = default;
  Matrix(Field f, size_t rows, size_t cols);
  static Matrix identity(Field f, size_t n);
  static Matrix from_rows(Field f, const std::vector<Vec>& rows);
  static Matrix from_columns(Field f, size_t nrows, const std::vector<Vec>& cols);

  Field field() const noexcept { return field_; }
  size_t rows() const noexcept { return rows_; }
  size_t cols() const noexcept { return cols_; }
  Value& operator()(size_t i, size_t j) { return data_[i * cols_ + j]; }
  const Value& operator()(size_t i, size_t j) const { return data_[i * cols_ + j]; }
  Vec row(size_t i) const;
  Vec column(size_t j) const;

  Matrix operator*(const Matrix& o) const;
  Matrix operator+(const Matrix& o) const;
  Matrix scaled(const Value& c) const;
  Matrix transpose() const;
  Vec apply(const Vec& v) const;
  bool operator==(const Matrix& o) const;
  bool operator!=(const Matrix& o) const { return !(*this == o); }
  bool is_zero() const;
  bool is_square() const noexcept { return rows_ == cols_; }
  /// Block-diagonal sum.
  Matrix direct_sum(const Matrix& o) const;

 private:
  Field field_ = nullptr;
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<Value> data_;
};

/// Reduced row echelon form in place; returns the pivot columns.
std::vector<size_t> row_reduce(Matrix& m);
size_t rank(const Matrix& m);
Value det(const Matrix& m);
std::optional<Matrix> inverse(const Matrix& m);
/// Basis of {x : m x = 0}.
std::vector<Vec> kernel(const Matrix& m);
/// Some x with m x = b.
std::optional<Vec> solve(const Matrix& m, const Vec& b);
/// Completes independent vectors in F^n to a basis using unit vectors.
std::vector<Vec> extend_to_basis(Field f, size_t n, const std::vector<Vec>& vs);
/// A maximal independent subset (by position).
std::vector<Vec> independent_subset(Field f, size_t n, const std::vector<Vec>& vs);

}  // namespace qfc2
