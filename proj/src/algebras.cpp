#include "qfc2/algebras.hpp"

#include <functional>

#include "internal.hpp"

namespace qfc2 {

namespace {

Algebra::Product sparse(const Vec& v) {
  Algebra::Product p;
  for (size_t i = 0; i < v.size(); ++i)
    if (!v[i].is_zero()) p.push_back({i, v[i]});
  return p;
}

std::vector<size_t> support(const Vec& v) {
  std::vector<size_t> s;
  for (size_t i = 0; i < v.size(); ++i)
    if (!v[i].is_zero()) s.push_back(i);
  return s;
}

Vec kron(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) out.push_back(x * y);
  return out;
}

}  // namespace

// ---- Algebra

Algebra::Algebra(Data d) : d_(std::move(d)), one_(d_.one) {}

Alg Algebra::make(Data data) {
  const size_t n = data.labels.size();
  if (data.table.size() != n * n || data.involution.rows() != n || data.involution.cols() != n || data.one.size() != n)
    throw std::logic_error("algebra data has inconsistent sizes");
  if (data.trd && data.trd->size() != n) throw std::logic_error("trace functional has the wrong size");
  std::shared_ptr<Algebra> A(new Algebra(std::move(data)));
  Field f = A->field();
  for (size_t i = 0; i < n; ++i) {
    const Vec e = A->basis(i);
    if (A->mul(A->one_, e) != e || A->mul(e, A->one_) != e) throw std::logic_error("identity element check failed");
  }
  const Matrix& S = A->d_.involution;
  if (S * S != Matrix::identity(f, n)) throw std::logic_error("involution does not square to the identity");
  std::vector<Vec> cols(n);
  for (size_t i = 0; i < n; ++i) cols[i] = S.column(i);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      Vec prod = zero_vec(f, n);
      for (const auto& t : A->product(i, j)) prod[t.index] += t.coeff;
      if (A->sigma(prod) != A->mul(cols[j], cols[i])) throw std::logic_error("involution is not anti-multiplicative");
    }
  Matrix SI = S + Matrix::identity(f, n);
  A->sym_ = kernel(SI);
  std::vector<Vec> images;
  for (size_t i = 0; i < n; ++i) images.push_back(SI.column(i));
  A->symd_ = independent_subset(f, n, images);
  // put 1 first in Symd when it lies there, so Symd bases start with the identity
  Matrix Sd = Matrix::from_columns(f, n, A->symd_);
  if (!A->symd_.empty() && solve(Sd, A->one_)) {
    std::vector<Vec> with_one{A->one_};
    for (const auto& v : A->symd_) with_one.push_back(v);
    A->symd_ = independent_subset(f, n, with_one);
  }
  return A;
}

Vec Algebra::mul(const Vec& a, const Vec& b) const {
  const size_t n = dim();
  Vec out = zero_vec(field(), n);
  const auto sa = support(a), sb = support(b);
  for (size_t i : sa)
    for (size_t j : sb) {
      const Value c = a[i] * b[j];
      for (const auto& t : d_.table[i * n + j]) out[t.index] += c * t.coeff;
    }
  return out;
}

Value Algebra::trd(const Vec& a) const {
  if (!d_.trd) throw Error(Error::Kind::unsupported, "reduced trace not available for " + name());
  return dot(*d_.trd, a);
}

Matrix Algebra::left_matrix(const Vec& a) const {
  std::vector<Vec> cols;
  for (size_t j = 0; j < dim(); ++j) cols.push_back(mul(a, basis(j)));
  return Matrix::from_columns(field(), dim(), cols);
}

std::optional<Vec> Algebra::inverse(const Vec& a) const {
  const Matrix L = left_matrix(a);
  if (det(L).is_zero()) return std::nullopt;
  return solve(L, one_);
}

std::optional<Value> Algebra::as_scalar(const Vec& a) const {
  // the identity has some nonzero coordinate k
  for (size_t k = 0; k < dim(); ++k) {
    if (one_[k].is_zero()) continue;
    const Value c = a[k] / one_[k];
    if (scale(one_, c) == a) return c;
    return std::nullopt;
  }
  return std::nullopt;
}

Alg Algebra::twisted(const Vec& x, const std::string& name) const {
  auto xi = inverse(x);
  if (!xi) throw Error(Error::Kind::precondition_failed, "twist element is not invertible");
  if (sigma(x) != x) throw Error(Error::Kind::precondition_failed, "TwistNotSymmetric: sigma(x) != x");
  Data d = d_;
  d.name = name;
  std::vector<Vec> cols;
  for (size_t j = 0; j < dim(); ++j) cols.push_back(mul(mul(x, sigma(basis(j))), *xi));
  d.involution = Matrix::from_columns(field(), dim(), cols);
  return make(std::move(d));
}

std::string Algebra::element_to_string(const Vec& a) const {
  std::string out;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_zero()) continue;
    std::string c = a[i].to_string();
    std::string term;
    if (a[i].is_one()) term = d_.labels[i];
    else term = (c.find_first_of("+/") != std::string::npos ? "(" + c + ")" : c) + "*" + d_.labels[i];
    out += (out.empty() ? "" : " + ") + term;
  }
  return out.empty() ? "0" : out;
}

Vec random_element(const Algebra& A, int height, std::mt19937_64& rng) {
  Vec x(A.dim());
  for (auto& c : x) c = random_value(A.field(), height, rng);
  return x;
}

bool is_associative(const Algebra& A) {
  const size_t n = A.dim();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      const Vec ij = A.mul(A.basis(i), A.basis(j));
      for (size_t k = 0; k < n; ++k)
        if (A.mul(ij, A.basis(k)) != A.mul(A.basis(i), A.mul(A.basis(j), A.basis(k)))) return false;
    }
  return true;
}

// ---- hermitian forms

HermitianForm::HermitianForm(Quat Q, std::vector<std::vector<Quaternion>> entries) : Q_(std::move(Q)), h_(std::move(entries)) {
  const size_t r = h_.size();
  for (const auto& row : h_)
    if (row.size() != r) throw Error(Error::Kind::precondition_failed, "hermitian matrix must be square");
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < r; ++j) {
      if (h_[i][j].alg != Q_) throw Error(Error::Kind::field_mismatch, "hermitian entries from another algebra");
      if (h_[j][i] != Q_->conj(h_[i][j])) throw Error(Error::Kind::precondition_failed, "matrix is not hermitian");
    }
}

HermitianForm HermitianForm::diagonal(const Quat& Q, const Vec& d) {
  std::vector<std::vector<Quaternion>> h(d.size(), std::vector<Quaternion>(d.size(), Q->scalar(Value::zero(Q->field()))));
  for (size_t i = 0; i < d.size(); ++i) h[i][i] = Q->scalar(d[i]);
  return HermitianForm(Q, std::move(h));
}

bool HermitianForm::is_alternating() const {
  for (size_t i = 0; i < rank(); ++i)
    for (size_t k = 1; k < 4; ++k)
      if (!h_[i][i].x[k].is_zero()) return false;
  return true;
}

std::string HermitianForm::to_string() const {
  std::string out = "[";
  for (size_t i = 0; i < rank(); ++i) {
    out += i ? "; " : "";
    for (size_t j = 0; j < rank(); ++j) out += (j ? ", " : "") + h_[i][j].to_string();
  }
  return out + "]";
}

namespace {

using QVec = std::vector<Quaternion>;

Quaternion hform(const HermitianForm& h, const QVec& x, const QVec& y) {
  const Quat& Q = h.algebra();
  Quaternion acc = Q->scalar(Value::zero(Q->field()));
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t j = 0; j < y.size(); ++j) acc = acc + Q->conj(x[i]) * h(i, j) * y[j];
  return acc;
}

}  // namespace

HermitianDiagonalization diagonalize_hermitian(const HermitianForm& h) {
  const Quat& Q = h.algebra();
  Field f = Q->field();
  const size_t r = h.rank();
  if (!h.is_alternating()) throw Error(Error::Kind::precondition_failed, "hermitian form is not alternating");
  const Quaternion zero = Q->scalar(Value::zero(f));
  std::vector<QVec> rest;
  for (size_t i = 0; i < r; ++i) {
    QVec e(r, zero);
    e[i] = Q->one();
    rest.push_back(e);
  }
  HermitianDiagonalization out;
  std::vector<QVec> chosen;
  auto add_to = [&](QVec x, const QVec& y, const Quaternion& c) {
    for (size_t i = 0; i < r; ++i) x[i] = x[i] + y[i] * c;
    return x;
  };
  while (!rest.empty()) {
    // a vector with h(v, v) != 0: some basis vector, or x + y c with Trd(h(x, y) c) != 0
    std::optional<QVec> v;
    for (size_t i = 0; i < rest.size() && !v; ++i)
      if (!hform(h, rest[i], rest[i]).is_zero()) v = rest[i];
    for (size_t i = 0; i < rest.size() && !v; ++i)
      for (size_t j = 0; j < rest.size() && !v; ++j) {
        if (i == j) continue;
        const Quaternion hij = hform(h, rest[i], rest[j]);
        for (size_t k = 0; k < 4 && !v; ++k)
          if (!Q->trd(hij * Q->basis(k)).is_zero()) v = add_to(rest[i], rest[j], Q->basis(k));
      }
    if (!v) throw Error(Error::Kind::degenerate_input, "DegenerateHermitian: form is degenerate");
    const Quaternion hv = hform(h, *v, *v);
    const Value d = hv.x[0];
    const Quaternion dinv = Q->scalar(d.inv());
    std::vector<QVec> next;
    for (const auto& w : rest) {
      QVec w2 = add_to(w, *v, dinv * hform(h, *v, w));
      bool nonzero = false;
      for (const auto& c : w2) nonzero = nonzero || !c.is_zero();
      if (nonzero) next.push_back(w2);
    }
    chosen.push_back(*v);
    out.diagonal.push_back(d);
    // reduce to a spanning family of the orthogonal complement of size r - |chosen|
    std::vector<QVec> basis;
    for (const auto& w : next) {
      // Q-linear independence via F-coordinates of the right Q-span
      std::vector<Vec> span;
      auto flatten = [&](const QVec& x) {
        Vec out;
        for (const auto& q : x)
          for (const auto& c : q.x) out.push_back(c);
        return out;
      };
      for (const auto& b : chosen)
        for (size_t k = 0; k < 4; ++k) {
          QVec bk = b;
          for (auto& q : bk) q = q * Q->basis(k);
          span.push_back(flatten(bk));
        }
      for (const auto& b : basis)
        for (size_t k = 0; k < 4; ++k) {
          QVec bk = b;
          for (auto& q : bk) q = q * Q->basis(k);
          span.push_back(flatten(bk));
        }
      const size_t before = rank(Matrix::from_columns(f, 4 * r, span));
      span.push_back(flatten(w));
      if (rank(Matrix::from_columns(f, 4 * r, span)) > before) basis.push_back(w);
      if (basis.size() + chosen.size() == r) break;
    }
    rest = basis;
    if (rest.size() + chosen.size() != r) throw Error(Error::Kind::degenerate_input, "DegenerateHermitian: lost rank");
  }
  out.change.assign(r, QVec(r, zero));
  for (size_t j = 0; j < r; ++j)
    for (size_t i = 0; i < r; ++i) out.change[i][j] = chosen[j][i];
  // conj(P)^T H P = diag(d)
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < r; ++j) {
      const Quaternion v = hform(h, chosen[i], chosen[j]);
      if (v != (i == j ? Q->scalar(out.diagonal[i]) : zero)) throw std::logic_error("hermitian diagonalization check failed");
    }
  return out;
}

// ---- expressions

Expr AlgebraExpression::base(Field f) {
  std::shared_ptr<AlgebraExpression> e(new AlgebraExpression);
  e->kind_ = Kind::base;
  e->field_ = f;
  e->degree_ = 1;
  return e;
}

Expr AlgebraExpression::quat(Quat H) {
  std::shared_ptr<AlgebraExpression> e(new AlgebraExpression);
  e->kind_ = Kind::quat;
  e->field_ = H->field();
  e->degree_ = 2;
  e->quat_ = std::move(H);
  return e;
}

Expr AlgebraExpression::matrix(size_t n, Expr inner) {
  if (n == 0) throw Error(Error::Kind::precondition_failed, "matrix size must be positive");
  std::shared_ptr<AlgebraExpression> e(new AlgebraExpression);
  e->kind_ = Kind::matrix;
  e->field_ = inner->field();
  e->degree_ = n * inner->degree();
  e->n_ = n;
  e->left_ = std::move(inner);
  return e;
}

Expr AlgebraExpression::tensor(Expr left, Expr right) {
  if (left->field() != right->field()) throw Error(Error::Kind::field_mismatch, "tensor factors over different fields");
  std::shared_ptr<AlgebraExpression> e(new AlgebraExpression);
  e->kind_ = Kind::tensor;
  e->field_ = left->field();
  e->degree_ = left->degree() * right->degree();
  e->left_ = std::move(left);
  e->right_ = std::move(right);
  return e;
}

Expr AlgebraExpression::adjoint(const BilinearForm& b) {
  if (!b.is_nondegenerate()) throw Error(Error::Kind::degenerate_input, "adjoint of a degenerate bilinear form");
  std::shared_ptr<AlgebraExpression> e(new AlgebraExpression);
  e->kind_ = Kind::adjoint_bilinear;
  e->field_ = b.field();
  e->degree_ = b.dim();
  e->b_ = b;
  return e;
}

Expr AlgebraExpression::adjoint(const HermitianForm& h) {
  std::shared_ptr<AlgebraExpression> e(new AlgebraExpression);
  e->kind_ = Kind::adjoint_hermitian;
  e->field_ = h.algebra()->field();
  e->degree_ = 2 * h.rank();
  e->quat_ = h.algebra();
  e->h_ = h;
  return e;
}

Expr AlgebraExpression::twist(Expr inner, Vec x) {
  std::shared_ptr<AlgebraExpression> e(new AlgebraExpression);
  e->kind_ = Kind::twist;
  e->field_ = inner->field();
  e->degree_ = inner->degree();
  e->left_ = std::move(inner);
  e->x_ = std::move(x);
  return e;
}

std::string AlgebraExpression::to_string() const {
  switch (kind_) {
    case Kind::base: return "F";
    case Kind::quat: return "quat[" + quat_->r().to_string() + "," + quat_->s().to_string() + ")";
    case Kind::matrix: return "M" + std::to_string(n_) + "(" + left_->to_string() + ")";
    case Kind::tensor: return "(" + left_->to_string() + " (x) " + right_->to_string() + ")";
    case Kind::adjoint_bilinear: {
      std::string out = "Ad<";
      for (size_t i = 0; i < b_->dim(); ++i) {
        out += (i ? "," : "");
        out += b_->gram()(i, i).to_string();
      }
      bool diag = true;
      for (size_t i = 0; i < b_->dim(); ++i)
        for (size_t j = 0; j < b_->dim(); ++j) diag = diag && (i == j || b_->gram()(i, j).is_zero());
      if (diag) return out + ">";
      out = "Ad(gram";
      for (size_t i = 0; i < b_->dim(); ++i) {
        out += "[";
        for (size_t j = 0; j < b_->dim(); ++j) out += (j ? "," : "") + b_->gram()(i, j).to_string();
        out += "]";
      }
      return out + ")";
    }
    case Kind::adjoint_hermitian: return "Ad_h(" + h_->to_string() + " over " + AlgebraExpression::quat(quat_)->to_string() + ")";
    case Kind::twist: {
      std::string out = "Int(";
      for (size_t i = 0; i < x_.size(); ++i) out += (i ? "," : "") + x_[i].to_string();
      return out + ")*" + left_->to_string();
    }
  }
  return "?";
}

namespace {

Alg base_algebra(Field f) {
  Algebra::Data d;
  d.field = f;
  d.degree = 1;
  d.labels = {"1"};
  d.table = {Algebra::Product{{0, Value::one(f)}}};
  d.one = {Value::one(f)};
  d.involution = Matrix::identity(f, 1);
  d.trd = Vec{Value::one(f)};
  d.name = "F";
  return Algebra::make(std::move(d));
}

Alg quat_algebra(const Quat& H, const std::string& name) {
  Field f = H->field();
  Algebra::Data d;
  d.field = f;
  d.degree = 2;
  d.labels = {"1", "u", "v", "w"};
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) d.table.push_back(sparse(H->table(i, j)));
  d.one = unit_vec(f, 4, 0);
  std::vector<Vec> cols;
  for (size_t i = 0; i < 4; ++i) cols.push_back(H->conj(H->basis(i)).x);
  d.involution = Matrix::from_columns(f, 4, cols);
  d.trd = Vec{Value::zero(f), Value::one(f), Value::zero(f), Value::zero(f)};
  d.name = name;
  // r = c^2 + c: u + c is idempotent with conjugate 1 + u + c
  if (auto c = artin_schreier_solve(H->r())) {
    const Vec e = (H->u() + H->scalar(*c)).x;
    d.hyperbolic_hints.push_back(e);
    d.isotropic_hints.push_back(e);
  }
  d.quaternion_hints.emplace_back(H->u().x, H->v().x);
  return Algebra::make(std::move(d));
}

std::string label_join(const std::string& a, const std::string& b) { return a + "(x)" + b; }

Alg matrix_algebra(size_t n, const Alg& A, const std::string& name) {
  Field f = A->field();
  const size_t da = A->dim(), N = n * n * da;
  auto idx = [&](size_t i, size_t j, size_t k) { return (i * n + j) * da + k; };
  Algebra::Data d;
  d.field = f;
  d.degree = n * A->degree();
  d.name = name;
  d.labels.resize(N);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t k = 0; k < da; ++k)
        d.labels[idx(i, j, k)] = "E" + std::to_string(i + 1) + std::to_string(j + 1) +
                                 (da == 1 ? "" : "*" + A->labels()[k]);
  d.table.assign(N * N, {});
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t k = 0; k < da; ++k)
        for (size_t m = 0; m < n; ++m)
          for (size_t p = 0; p < da; ++p) {
            // (E_ij a_k)(E_jm a_p) = E_im a_k a_p
            Algebra::Product prod;
            for (const auto& t : A->product(k, p)) prod.push_back({idx(i, m, t.index), t.coeff});
            d.table[idx(i, j, k) * N + idx(j, m, p)] = prod;
          }
  d.one = zero_vec(f, N);
  for (size_t i = 0; i < n; ++i)
    for (size_t k = 0; k < da; ++k) d.one[idx(i, i, k)] = A->one()[k];
  Matrix S(f, N, N);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t k = 0; k < da; ++k) {
        const Vec sk = A->sigma(A->basis(k));
        for (size_t p = 0; p < da; ++p) S(idx(j, i, p), idx(i, j, k)) = sk[p];
      }
  d.involution = S;
  if (A->has_trd()) {
    Vec t = zero_vec(f, N);
    for (size_t i = 0; i < n; ++i)
      for (size_t k = 0; k < da; ++k) t[idx(i, i, k)] = (*A->data().trd)[k];
    d.trd = t;
  }
  auto diag_lift = [&](const Vec& a) {
    Vec out = zero_vec(f, N);
    for (size_t i = 0; i < n; ++i)
      for (size_t k = 0; k < da; ++k) out[idx(i, i, k)] = a[k];
    return out;
  };
  auto corner = [&](const Vec& a) {
    Vec out = zero_vec(f, N);
    for (size_t k = 0; k < da; ++k) out[idx(0, 0, k)] = a[k];
    return out;
  };
  for (const auto& e : A->data().hyperbolic_hints) d.hyperbolic_hints.push_back(diag_lift(e));
  for (const auto& x : A->data().isotropic_hints) d.isotropic_hints.push_back(corner(x));
  for (const auto& [p, q] : A->data().quaternion_hints) d.quaternion_hints.emplace_back(diag_lift(p), diag_lift(q));
  return Algebra::make(std::move(d));
}

Alg tensor_algebra(const Alg& A, const Alg& B, const std::string& name) {
  Field f = A->field();
  const size_t da = A->dim(), db = B->dim(), N = da * db;
  Algebra::Data d;
  d.field = f;
  d.degree = A->degree() * B->degree();
  d.name = name;
  for (size_t i = 0; i < da; ++i)
    for (size_t j = 0; j < db; ++j) d.labels.push_back(label_join(A->labels()[i], B->labels()[j]));
  d.table.assign(N * N, {});
  for (size_t i = 0; i < da; ++i)
    for (size_t j = 0; j < db; ++j)
      for (size_t k = 0; k < da; ++k)
        for (size_t l = 0; l < db; ++l) {
          Algebra::Product prod;
          for (const auto& s : A->product(i, k))
            for (const auto& t : B->product(j, l)) prod.push_back({s.index * db + t.index, s.coeff * t.coeff});
          d.table[(i * db + j) * N + (k * db + l)] = prod;
        }
  d.one = kron(A->one(), B->one());
  Matrix S(f, N, N);
  for (size_t i = 0; i < da; ++i)
    for (size_t j = 0; j < db; ++j) {
      const Vec col = kron(A->sigma(A->basis(i)), B->sigma(B->basis(j)));
      for (size_t r = 0; r < N; ++r) S(r, i * db + j) = col[r];
    }
  d.involution = S;
  if (A->has_trd() && B->has_trd()) d.trd = kron(*A->data().trd, *B->data().trd);
  for (const auto& e : A->data().hyperbolic_hints) d.hyperbolic_hints.push_back(kron(e, B->one()));
  for (const auto& e : B->data().hyperbolic_hints) d.hyperbolic_hints.push_back(kron(A->one(), e));
  for (const auto& x : A->data().isotropic_hints) d.isotropic_hints.push_back(kron(x, B->one()));
  for (const auto& x : B->data().isotropic_hints) d.isotropic_hints.push_back(kron(A->one(), x));
  for (const auto& [p, q] : A->data().quaternion_hints) d.quaternion_hints.emplace_back(kron(p, B->one()), kron(q, B->one()));
  for (const auto& [p, q] : B->data().quaternion_hints) d.quaternion_hints.emplace_back(kron(A->one(), p), kron(A->one(), q));
  return Algebra::make(std::move(d));
}

/// Matrix of a (x) b -> (x -> a x conj(b)) on the coordinates of H, columns indexed i*4+j.
Matrix sandwich_matrix(const Quat& H) {
  Field f = H->field();
  Matrix M(f, 16, 16);
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j)
      for (size_t k = 0; k < 4; ++k) {
        const Vec img = (H->basis(i) * H->basis(k) * H->conj(H->basis(j))).x;
        for (size_t r = 0; r < 4; ++r) M(r * 4 + k, i * 4 + j) = img[r];
      }
  return M;
}

/// In (Q, bar) (x) (Q, bar): the idempotent mapping to the projection onto span(1, v) along span(u, w).
Vec sandwich_idempotent(const Quat& H) {
  Field f = H->field();
  Vec P = zero_vec(f, 16);
  P[0 * 4 + 0] = Value::one(f);
  P[2 * 4 + 2] = Value::one(f);
  auto e = solve(sandwich_matrix(H), P);
  if (!e) throw std::logic_error("sandwich map is not bijective");
  return *e;
}

Vec matrix_element(const Matrix& M) {
  Vec out;
  for (size_t i = 0; i < M.rows(); ++i)
    for (size_t j = 0; j < M.cols(); ++j) out.push_back(M(i, j));
  return out;
}

Alg materialize_impl(const Expr& e) {
  using K = AlgebraExpression::Kind;
  const std::string name = e->to_string();
  switch (e->kind()) {
    case K::base: return base_algebra(e->field());
    case K::quat: return quat_algebra(e->quaternion(), name);
    case K::matrix: return matrix_algebra(e->size(), materialize_impl(e->left()), name);
    case K::tensor: {
      Alg A = tensor_algebra(materialize_impl(e->left()), materialize_impl(e->right()), name);
      const auto& l = e->left();
      const auto& r = e->right();
      if (l->kind() == K::quat && r->kind() == K::quat && l->quaternion()->r() == r->quaternion()->r() &&
          l->quaternion()->s() == r->quaternion()->s()) {
        Algebra::Data d = A->data();
        const Vec s = sandwich_idempotent(l->quaternion());
        d.hyperbolic_hints.insert(d.hyperbolic_hints.begin(), s);
        d.isotropic_hints.insert(d.isotropic_hints.begin(), s);
        return Algebra::make(std::move(d));
      }
      return A;
    }
    case K::adjoint_bilinear: {
      const BilinearForm& b = *e->bilinear();
      Field f = e->field();
      const size_t n = b.dim();
      Alg M = matrix_algebra(n, base_algebra(f), "M" + std::to_string(n) + "(F)");
      auto Binv = inverse(b.gram());
      Alg A = M->twisted(matrix_element(*Binv), name);
      Algebra::Data d = A->data();
      d.hyperbolic_hints.clear();
      d.isotropic_hints.clear();
      d.quaternion_hints.clear();
      // v with b(v, v) = 0 gives x = v v^T B
      Vec diag;
      for (size_t i = 0; i < n; ++i) diag.push_back(b.gram()(i, i));
      auto v = isotropic_vector(QuadraticForm::diagonal(f, diag), 0);
      if (v.is_yes()) {
        Matrix V = Matrix::from_columns(f, n, {*v.witness});
        d.isotropic_hints.push_back(matrix_element(V * V.transpose() * b.gram()));
      }
      if (b.is_alternating()) {
        const auto sb = symplectic_basis(b);
        Matrix T = Matrix::from_columns(f, n, sb);
        Matrix D(f, n, n);
        for (size_t i = 0; i < n; i += 2) D(i, i) = Value::one(f);
        d.hyperbolic_hints.push_back(matrix_element(T * D * *inverse(T)));
      }
      return Algebra::make(std::move(d));
    }
    case K::adjoint_hermitian: {
      const HermitianForm& h = *e->hermitian();
      const Quat& Q = h.algebra();
      Field f = e->field();
      const size_t r = h.rank();
      Alg M = matrix_algebra(r, quat_algebra(Q, "Q"), "M" + std::to_string(r) + "(Q)");
      Vec H = zero_vec(f, M->dim());
      for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j)
          for (size_t k = 0; k < 4; ++k) H[(i * r + j) * 4 + k] = h(i, j).x[k];
      auto Hinv = M->inverse(H);
      if (!Hinv) throw Error(Error::Kind::degenerate_input, "hermitian form is degenerate");
      return M->twisted(*Hinv, name);
    }
    case K::twist: return materialize_impl(e->left())->twisted(e->twist_element(), name);
  }
  throw std::logic_error("unknown expression kind");
}

}  // namespace

Alg materialize(const Expr& e) {
  if (e->degree() > kDegreeCap)
    throw Error(Error::Kind::unsupported, "DegreeCapExceeded: degree " + std::to_string(e->degree()) + " > 8");
  return materialize_impl(e);
}

std::optional<size_t> known_index(const Expr& e, int height) {
  using K = AlgebraExpression::Kind;
  switch (e->kind()) {
    case K::base:
    case K::adjoint_bilinear: return 1;
    case K::quat:
    case K::adjoint_hermitian: {
      const auto d = is_division(e->quaternion(), height);
      if (d.kind == VerdictKind::yes) return 2;
      if (d.kind == VerdictKind::no) return 1;
      return std::nullopt;
    }
    case K::matrix:
    case K::twist: return known_index(e->left(), height);
    case K::tensor: {
      const auto a = known_index(e->left(), height), b = known_index(e->right(), height);
      if (a && *a == 1) return b;
      if (b && *b == 1) return a;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::vector<Vec> symplectic_basis(const BilinearForm& b) {
  if (!b.is_alternating() || !b.is_nondegenerate())
    throw Error(Error::Kind::precondition_failed, "symplectic basis needs a nondegenerate alternating form");
  Field f = b.field();
  const size_t n = b.dim();
  std::vector<Vec> rest;
  for (size_t i = 0; i < n; ++i) rest.push_back(unit_vec(f, n, i));
  std::vector<Vec> out;
  while (!rest.empty()) {
    const Vec e = rest.front();
    std::optional<size_t> partner;
    for (size_t i = 1; i < rest.size() && !partner; ++i)
      if (!b(e, rest[i]).is_zero()) partner = i;
    if (!partner) throw std::logic_error("symplectic basis: no partner");
    const Vec fv = scale(rest[*partner], b(e, rest[*partner]).inv());
    std::vector<Vec> next;
    for (size_t i = 1; i < rest.size(); ++i) {
      if (i == *partner) continue;
      // w - b(w, f) e - b(e, w) f  is orthogonal to e and f
      Vec w = rest[i];
      w = add(w, scale(e, b(rest[i], fv)));
      w = add(w, scale(fv, b(e, rest[i])));
      next.push_back(w);
    }
    out.push_back(e);
    out.push_back(fv);
    rest = independent_subset(f, n, next);
  }
  return out;
}

// ---- involution type

std::string to_string(InvolutionType t) { return t == InvolutionType::symplectic ? "symplectic" : "orthogonal"; }

InvolutionType involution_type(const Algebra& A) {
  Field f = A.field();
  const Matrix SI = A.involution_matrix() + Matrix::identity(f, A.dim());
  const bool one_in_symd = solve(SI, A.one()).has_value();
  if (A.has_trd()) {
    bool trd_vanishes = true;
    for (const auto& s : A.sym_basis()) trd_vanishes = trd_vanishes && A.trd(s).is_zero();
    if (trd_vanishes != one_in_symd)
      throw Error(Error::Kind::criteria_disagree, "CriteriaDisagree: 1 in Symd and Trd|Sym = 0 differ");
  }
  return one_in_symd ? InvolutionType::symplectic : InvolutionType::orthogonal;
}

// ---- searches

namespace {

constexpr uint64_t kAlgebraBudget = 20000;

/// Enumerates base + sum c_i gens[i] with few nonzero c_i from small scalars, sparsest first.
/// Returns true when fn accepted; sets complete when the whole affine space was covered.
bool sparse_search(Field f, const Vec& base, const std::vector<Vec>& gens, int height, uint64_t budget,
                   const std::function<bool(const Vec&)>& fn, bool& complete) {
  std::vector<Value> coeffs;
  for (const auto& c : enumerate(f, f->is_finite() ? 0 : std::min(height, 1)))
    if (!c.is_zero()) coeffs.push_back(c);
  const size_t m = gens.size();
  uint64_t used = 0;
  complete = false;
  if (fn(base)) return true;
  ++used;
  for (size_t k = 1; k <= m; ++k) {
    // supports of size k in lexicographic order, coefficients odometer-style
    std::vector<size_t> sup(k);
    for (size_t i = 0; i < k; ++i) sup[i] = i;
    for (;;) {
      std::vector<size_t> ci(k, 0);
      for (;;) {
        Vec x = base;
        for (size_t i = 0; i < k; ++i) x = add(x, scale(gens[sup[i]], coeffs[ci[i]]));
        if (fn(x)) return true;
        if (++used >= budget) return false;
        size_t p = 0;
        while (p < k && ++ci[p] == coeffs.size()) ci[p++] = 0;
        if (p == k) break;
      }
      // next support
      size_t i = k;
      while (i > 0 && sup[i - 1] == m - k + i - 1) --i;
      if (i == 0) break;
      ++sup[i - 1];
      for (size_t j = i; j < k; ++j) sup[j] = sup[j - 1] + 1;
    }
  }
  complete = f->is_finite();
  return false;
}

}  // namespace

Verdict<Vec> isotropy(const Algebra& A, int height, std::optional<size_t> index) {
  using V = Verdict<Vec>;
  auto ok = [&](const Vec& x) { return !is_zero(x) && is_zero(A.mul(A.sigma(x), x)); };
  for (const auto& x : A.data().isotropic_hints)
    if (ok(x)) return V::yes(x, "constructed");
  for (const auto& e : A.data().hyperbolic_hints)
    if (ok(e)) return V::yes(e, "constructed");
  if (index && A.degree() && *index == A.degree()) return V::no(Cert::structural, "division algebra: every involution is anisotropic");
  bool complete = false;
  std::vector<Vec> gens;
  for (size_t i = 0; i < A.dim(); ++i) gens.push_back(A.basis(i));
  std::optional<Vec> found;
  sparse_search(A.field(), A.zero(), gens, height, kAlgebraBudget, [&](const Vec& x) {
    if (ok(x)) found = x;
    return found.has_value();
  }, complete);
  if (found) return V::yes(*found, "search");
  if (complete) return V::no(Cert::finite_field_exhaustion, "no isotropic element");
  return V::unknown(height, "no isotropic element found within budget");
}

Verdict<Vec> hyperbolicity(const Algebra& A, int height, std::optional<size_t> index) {
  using V = Verdict<Vec>;
  auto ok = [&](const Vec& e) { return A.mul(e, e) == e && A.sigma(e) == add(A.one(), e); };
  for (const auto& e : A.data().hyperbolic_hints)
    if (ok(e)) return V::yes(e, "constructed");
  if (index && A.degree() && (A.degree() / *index) % 2 == 1)
    return V::no(Cert::structural, "odd coindex");
  Field f = A.field();
  const Matrix SI = A.involution_matrix() + Matrix::identity(f, A.dim());
  auto e0 = solve(SI, A.one());
  if (!e0) return V::no(Cert::structural, "1 is not symmetrized");
  bool complete = false;
  std::optional<Vec> found;
  sparse_search(f, *e0, A.sym_basis(), height, kAlgebraBudget, [&](const Vec& e) {
    if (ok(e)) found = e;
    return found.has_value();
  }, complete);
  if (found) return V::yes(*found, "search");
  if (complete) return V::no(Cert::finite_field_exhaustion, "no hyperbolic idempotent");
  return V::unknown(height, "no hyperbolic idempotent found within budget");
}

Verdict<Vec> isotropy(const Expr& e, int height) { return isotropy(*materialize(e), height, known_index(e, height)); }

Verdict<Vec> hyperbolicity(const Expr& e, int height) {
  return hyperbolicity(*materialize(e), height, known_index(e, height));
}

// ---- (Q, bar) inside (A, sigma)

bool check_quaternion_pair(const Algebra& A, const Value& a, const Value& b, const QuaternionPair& pq) {
  const Vec& p = pq.p;
  const Vec& q = pq.q;
  const Vec one = A.one();
  if (add(A.mul(p, p), p) != A.scalar(a)) return false;
  if (A.mul(q, q) != A.scalar(b)) return false;
  if (A.mul(p, q) != A.mul(q, add(one, p))) return false;
  if (A.sigma(p) != add(one, p)) return false;
  return A.sigma(q) == q;
}

Verdict<QuaternionPair> contains_Q_canonical(const Algebra& A, const Quat& Q, int height, std::optional<size_t> index) {
  using V = Verdict<QuaternionPair>;
  if (Q->field() != A.field()) throw Error(Error::Kind::field_mismatch, "Q over another field");
  if (involution_type(A) != InvolutionType::symplectic)
    throw Error(Error::Kind::precondition_failed, "involution is not symplectic");
  const Value a = Q->r(), b = Q->s();
  for (const auto& [p, q] : A.data().quaternion_hints) {
    QuaternionPair pq{p, q};
    if (check_quaternion_pair(A, a, b, pq)) return V::yes(pq, "constructed");
  }
  // a division Q in split A has a centralizer Brauer-equivalent to Q, of even degree
  if (index && *index == 1 && A.degree() % 4 != 0 && is_division(Q, height).kind == VerdictKind::yes)
    return V::no(Cert::structural, "split of degree not divisible by 4");
  Field f = A.field();
  const size_t n = A.dim();
  const Matrix SI = A.involution_matrix() + Matrix::identity(f, n);
  auto p0 = solve(SI, A.one());
  if (!p0) return V::no(Cert::structural, "1 is not symmetrized");
  bool complete_p = false;
  bool all_complete = true;
  std::optional<QuaternionPair> found;
  sparse_search(f, *p0, A.sym_basis(), height, kAlgebraBudget / 4, [&](const Vec& p) {
    if (add(A.mul(p, p), p) != A.scalar(a)) return false;
    // q with sigma(q) = q and p q + q + q p = 0
    const Matrix Lp = A.left_matrix(p);
    std::vector<Vec> rows;
    Matrix Rp(f, n, n);
    for (size_t j = 0; j < n; ++j) {
      const Vec c = A.mul(A.basis(j), p);
      for (size_t i = 0; i < n; ++i) Rp(i, j) = c[i];
    }
    Matrix C = Lp + Rp + Matrix::identity(f, n);
    Matrix stacked(f, 2 * n, n);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        stacked(i, j) = C(i, j);
        stacked(n + i, j) = SI(i, j);
      }
    const auto K = kernel(stacked);
    bool complete_q = false;
    sparse_search(f, A.zero(), K, height, 2000, [&](const Vec& q) {
      if (is_zero(q) || A.mul(q, q) != A.scalar(b)) return false;
      found = QuaternionPair{p, q};
      return true;
    }, complete_q);
    all_complete = all_complete && complete_q;
    return found.has_value();
  }, complete_p);
  if (found) {
    if (!check_quaternion_pair(A, a, b, *found)) throw std::logic_error("quaternion pair check failed");
    return V::yes(*found, "search");
  }
  if (complete_p && all_complete) return V::no(Cert::finite_field_exhaustion, "no stable copy of (Q, bar)");
  return V::unknown(height, "no stable copy of (Q, bar) found within budget");
}

Verdict<QuaternionPair> contains_Q_canonical(const Expr& e, const Quat& Q, int height) {
  Alg A = materialize(e);
  Field f = A->field();
  if (e->kind() == AlgebraExpression::Kind::adjoint_bilinear && e->bilinear()->is_alternating() && e->degree() == 4 &&
      involution_type(*A) == InvolutionType::symplectic) {
    // (M4, ad_b) = (End(Q), ad of the norm polar) = (Q, bar) (x) (Q, bar), via symplectic bases
    const BilinearForm& b = *e->bilinear();
    const Matrix T = Matrix::from_columns(f, 4, symplectic_basis(b));
    const Matrix Tn = Matrix::from_columns(f, 4, symplectic_basis(Q->norm_form().polar()));
    const Matrix g = Tn * *inverse(T);  // V_b -> Q, isometry of the polar forms
    const Matrix gi = *inverse(g);
    auto left_mult = [&](const Quaternion& x) {
      Matrix L(f, 4, 4);
      for (size_t k = 0; k < 4; ++k) {
        const Vec c = (x * Q->basis(k)).x;
        for (size_t r = 0; r < 4; ++r) L(r, k) = c[r];
      }
      return L;
    };
    QuaternionPair pq{matrix_element(gi * left_mult(Q->u()) * g), matrix_element(gi * left_mult(Q->v()) * g)};
    if (check_quaternion_pair(*A, Q->r(), Q->s(), pq)) return Verdict<QuaternionPair>::yes(pq, "constructed");
  }
  if (e->kind() == AlgebraExpression::Kind::adjoint_hermitian && e->hermitian()->is_alternating() &&
      e->quaternion()->r() == Q->r() && e->quaternion()->s() == Q->s()) {
    const auto dec = decompose_brauer_Q(e);
    Alg M = dec.map.source;
    const size_t r = e->hermitian()->rank();
    Vec p = zero_vec(f, M->dim()), q = zero_vec(f, M->dim());
    for (size_t i = 0; i < r; ++i) {
      p[(i * r + i) * 4 + 1] = Value::one(f);
      q[(i * r + i) * 4 + 2] = Value::one(f);
    }
    QuaternionPair pq{dec.map.M.apply(p), dec.map.M.apply(q)};
    if (check_quaternion_pair(*A, Q->r(), Q->s(), pq)) return Verdict<QuaternionPair>::yes(pq, "constructed");
  }
  return contains_Q_canonical(*A, Q, height, known_index(e, height));
}

// ---- maps

bool AlgebraMap::verify() const {
  const size_t n = source->dim();
  if (target->dim() != n || M.rows() != n || M.cols() != n) return false;
  if (det(M).is_zero()) return false;
  std::vector<Vec> img(n);
  for (size_t i = 0; i < n; ++i) img[i] = M.column(i);
  if (M.apply(source->one()) != target->one()) return false;
  for (size_t i = 0; i < n; ++i) {
    if (M.apply(source->sigma(source->basis(i))) != target->sigma(img[i])) return false;
    for (size_t j = 0; j < n; ++j)
      if (M.apply(source->mul(source->basis(i), source->basis(j))) != target->mul(img[i], img[j])) return false;
  }
  return true;
}

BrauerQDecomposition decompose_brauer_Q(const Expr& e) {
  if (e->kind() != AlgebraExpression::Kind::adjoint_hermitian)
    throw Error(Error::Kind::precondition_failed, "expected an adjoint of a hermitian form over (Q, bar)");
  const HermitianForm& h = *e->hermitian();
  if (!h.is_alternating()) throw Error(Error::Kind::precondition_failed, "hermitian form is not alternating");
  const Quat& Q = h.algebra();
  Field f = Q->field();
  const size_t r = h.rank();
  const auto D = diagonalize_hermitian(h);
  BilinearForm b = BilinearForm::diagonal(f, D.diagonal);
  Expr model = AlgebraExpression::tensor(AlgebraExpression::adjoint(b), AlgebraExpression::quat(Q));
  Alg source = materialize(model);
  Alg target = materialize(e);
  const size_t N = target->dim();
  Vec P = zero_vec(f, N);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < r; ++j)
      for (size_t k = 0; k < 4; ++k) P[(i * r + j) * 4 + k] = D.change[i][j].x[k];
  auto Pi = target->inverse(P);
  if (!Pi) throw std::logic_error("change of basis is not invertible");
  std::vector<Vec> cols;
  for (size_t c = 0; c < N; ++c) cols.push_back(target->mul(target->mul(P, target->basis(c)), *Pi));
  AlgebraMap map{source, target, Matrix::from_columns(f, N, cols)};
  if (!map.verify()) throw std::logic_error("Brauer-Q decomposition map failed verification");
  return BrauerQDecomposition{b, model, map};
}

}  // namespace qfc2
