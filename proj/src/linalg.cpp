#include "qfc2/linalg.hpp"

namespace qfc2 {

Vec zero_vec(Field f, size_t n) { return Vec(n, Value::zero(f)); }

Vec unit_vec(Field f, size_t n, size_t i) {
  Vec v = zero_vec(f, n);
  v[i] = Value::one(f);
  return v;
}

Vec add(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw Error(Error::Kind::precondition_failed, "vector length mismatch");
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec scale(const Vec& a, const Value& c) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] * c;
  return r;
}

Value dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size() || a.empty()) throw Error(Error::Kind::precondition_failed, "vector length mismatch");
  Value s = Value::zero(a[0].field());
  for (size_t i = 0; i < a.size(); ++i)
    if (!a[i].is_zero() && !b[i].is_zero()) s += a[i] * b[i];
  return s;
}

bool is_zero(const Vec& a) {
  for (const auto& x : a)
    if (!x.is_zero()) return false;
  return true;
}

Matrix::Matrix(Field f, size_t rows, size_t cols)
    : field_(f), rows_(rows), cols_(cols), data_(rows * cols, Value::zero(f)) {}

Matrix Matrix::identity(Field f, size_t n) {
  Matrix m(f, n, n);
  for (size_t i = 0; i < n; ++i) m(i, i) = Value::one(f);
  return m;
}

Matrix Matrix::from_rows(Field f, const std::vector<Vec>& rows) {
  Matrix m(f, rows.size(), rows.empty() ? 0 : rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_) throw Error(Error::Kind::precondition_failed, "ragged matrix rows");
    for (size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Matrix Matrix::from_columns(Field f, size_t nrows, const std::vector<Vec>& cols) {
  Matrix m(f, nrows, cols.size());
  for (size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].size() != nrows) throw Error(Error::Kind::precondition_failed, "ragged matrix columns");
    for (size_t i = 0; i < nrows; ++i) m(i, j) = cols[j][i];
  }
  return m;
}

Vec Matrix::row(size_t i) const { return Vec(data_.begin() + static_cast<long>(i * cols_), data_.begin() + static_cast<long>((i + 1) * cols_)); }

Vec Matrix::column(size_t j) const {
  Vec c(rows_);
  for (size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

Matrix Matrix::operator*(const Matrix& o) const {
  if (cols_ != o.rows_) throw Error(Error::Kind::precondition_failed, "matrix shape mismatch");
  Matrix r(field_, rows_, o.cols_);
  for (size_t i = 0; i < rows_; ++i)
    for (size_t k = 0; k < cols_; ++k) {
      const Value& a = (*this)(i, k);
      if (a.is_zero()) continue;
      for (size_t j = 0; j < o.cols_; ++j)
        if (!o(k, j).is_zero()) r(i, j) += a * o(k, j);
    }
  return r;
}

Matrix Matrix::operator+(const Matrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(Error::Kind::precondition_failed, "matrix shape mismatch");
  Matrix r = *this;
  for (size_t i = 0; i < data_.size(); ++i) r.data_[i] += o.data_[i];
  return r;
}

Matrix Matrix::scaled(const Value& c) const {
  Matrix r = *this;
  for (auto& x : r.data_) x *= c;
  return r;
}

Matrix Matrix::transpose() const {
  Matrix r(field_, cols_, rows_);
  for (size_t i = 0; i < rows_; ++i)
    for (size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

Vec Matrix::apply(const Vec& v) const {
  if (v.size() != cols_) throw Error(Error::Kind::precondition_failed, "matrix-vector shape mismatch");
  Vec r = zero_vec(field_, rows_);
  for (size_t i = 0; i < rows_; ++i)
    for (size_t j = 0; j < cols_; ++j)
      if (!v[j].is_zero() && !(*this)(i, j).is_zero()) r[i] += (*this)(i, j) * v[j];
  return r;
}

bool Matrix::operator==(const Matrix& o) const {
  return field_ == o.field_ && rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
}

bool Matrix::is_zero() const {
  for (const auto& x : data_)
    if (!x.is_zero()) return false;
  return true;
}

Matrix Matrix::direct_sum(const Matrix& o) const {
  Matrix r(field_, rows_ + o.rows_, cols_ + o.cols_);
  for (size_t i = 0; i < rows_; ++i)
    for (size_t j = 0; j < cols_; ++j) r(i, j) = (*this)(i, j);
  for (size_t i = 0; i < o.rows_; ++i)
    for (size_t j = 0; j < o.cols_; ++j) r(rows_ + i, cols_ + j) = o(i, j);
  return r;
}

namespace {

size_t weight(const Value& v) {
  if (v.field()->is_finite()) return 0;
  return v.rat()->num.size() + v.rat()->den.size();
}

}  // namespace

std::vector<size_t> row_reduce(Matrix& m) {
  std::vector<size_t> pivots;
  size_t r = 0;
  for (size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    size_t best = m.rows();
    for (size_t i = r; i < m.rows(); ++i)
      if (!m(i, c).is_zero() && (best == m.rows() || weight(m(i, c)) < weight(m(best, c)))) best = i;
    if (best == m.rows()) continue;
    if (best != r)
      for (size_t j = 0; j < m.cols(); ++j) std::swap(m(best, j), m(r, j));
    const Value inv = m(r, c).inv();
    for (size_t j = c; j < m.cols(); ++j)
      if (!m(r, j).is_zero()) m(r, j) *= inv;
    for (size_t i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c).is_zero()) continue;
      const Value factor = m(i, c);
      for (size_t j = c; j < m.cols(); ++j)
        if (!m(r, j).is_zero()) m(i, j) += factor * m(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

size_t rank(const Matrix& m) {
  Matrix c = m;
  return row_reduce(c).size();
}

Value det(const Matrix& m) {
  if (!m.is_square()) throw Error(Error::Kind::precondition_failed, "determinant of a non-square matrix");
  Matrix a = m;
  const size_t n = a.rows();
  Value d = Value::one(m.field());
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    while (p < n && a(p, c).is_zero()) ++p;
    if (p == n) return Value::zero(m.field());
    if (p != c)
      for (size_t j = 0; j < n; ++j) std::swap(a(p, j), a(c, j));
    d *= a(c, c);
    const Value inv = a(c, c).inv();
    for (size_t i = c + 1; i < n; ++i) {
      if (a(i, c).is_zero()) continue;
      const Value factor = a(i, c) * inv;
      for (size_t j = c; j < n; ++j)
        if (!a(c, j).is_zero()) a(i, j) += factor * a(c, j);
    }
  }
  return d;
}

std::optional<Matrix> inverse(const Matrix& m) {
  if (!m.is_square()) throw Error(Error::Kind::precondition_failed, "inverse of a non-square matrix");
  const size_t n = m.rows();
  Matrix aug(m.field(), n, 2 * n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = Value::one(m.field());
  }
  auto piv = row_reduce(aug);
  if (piv.size() < n || piv[n - 1] != n - 1) return std::nullopt;
  Matrix inv(m.field(), n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

std::vector<Vec> kernel(const Matrix& m) {
  Matrix a = m;
  auto piv = row_reduce(a);
  std::vector<bool> is_pivot(m.cols(), false);
  for (size_t p : piv) is_pivot[p] = true;
  std::vector<Vec> basis;
  for (size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    Vec v = zero_vec(m.field(), m.cols());
    v[free] = Value::one(m.field());
    for (size_t r = 0; r < piv.size(); ++r) v[piv[r]] = a(r, free);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::optional<Vec> solve(const Matrix& m, const Vec& b) {
  if (b.size() != m.rows()) throw Error(Error::Kind::precondition_failed, "rhs length mismatch");
  Matrix aug(m.field(), m.rows(), m.cols() + 1);
  for (size_t i = 0; i < m.rows(); ++i) {
    for (size_t j = 0; j < m.cols(); ++j) aug(i, j) = m(i, j);
    aug(i, m.cols()) = b[i];
  }
  auto piv = row_reduce(aug);
  if (!piv.empty() && piv.back() == m.cols()) return std::nullopt;
  Vec x = zero_vec(m.field(), m.cols());
  for (size_t r = 0; r < piv.size(); ++r) x[piv[r]] = aug(r, m.cols());
  return x;
}

std::vector<Vec> independent_subset(Field f, size_t n, const std::vector<Vec>& vs) {
  std::vector<Vec> out;
  for (const auto& v : vs) {
    std::vector<Vec> trial = out;
    trial.push_back(v);
    if (rank(Matrix::from_columns(f, n, trial)) == trial.size()) out = std::move(trial);
  }
  return out;
}

std::vector<Vec> extend_to_basis(Field f, size_t n, const std::vector<Vec>& vs) {
  std::vector<Vec> all = vs;
  for (size_t i = 0; i < n; ++i) all.push_back(unit_vec(f, n, i));
  auto out = independent_subset(f, n, all);
  if (out.size() != n) throw Error(Error::Kind::precondition_failed, "cannot extend to a basis");
  for (size_t i = 0; i < vs.size(); ++i)
    if (!(out[i] == vs[i])) throw Error(Error::Kind::precondition_failed, "input vectors are dependent");
  return out;
}

}  // namespace qfc2
