#include <algorithm>
#include <functional>
#include <map>
#include <mutex>

#include "internal.hpp"

namespace qfc2 {

namespace detail {

QuadraticForm lift_form(const QuadraticForm& q, Field f) {
  if (q.field() == f) return q;
  Matrix m(f, q.dim(), q.dim());
  for (size_t i = 0; i < q.dim(); ++i)
    for (size_t j = 0; j < q.dim(); ++j) m(i, j) = Value::lift(q.gram_upper()(i, j), f);
  return QuadraticForm(m);
}

Matrix complement_of(const Matrix& W, const std::vector<Vec>& functionals) {
  Field f = W.field();
  if (functionals.empty()) return W;
  Matrix A = Matrix::from_rows(f, functionals);
  auto ker = kernel(A);
  if (ker.empty()) return Matrix(f, W.rows(), 0);
  return W * Matrix::from_columns(f, W.cols(), ker);
}

}  // namespace detail

using detail::complement_of;
using detail::kSearchBudget;
using detail::lift_form;

namespace {

Value canonical_trace_one(Field f) {
  for (uint32_t b = 1; b < f->size_finite(); ++b) {
    Value c = Value::from_finite(f, b);
    if (absolute_trace(c)) return c;
  }
  throw std::logic_error("no trace-one element");
}

Value base_value(Field K, const MPoly& num, const MPoly& den) {
  if (K->is_finite()) return Value::from_finite(K, num[0].coef) / Value::from_finite(K, den[0].coef);
  return Value::from_frac(K, num, den);
}

// Valuation at t = 0 of the top variable t.
int t_valuation(const Value& c) {
  const int top = c.field()->depth - 1;
  auto min_exp = [&](const MPoly& p) {
    int m = INT32_MAX;
    for (const auto& t : p) m = std::min(m, mpoly::exponent(t.mono, top));
    return m;
  };
  return min_exp(c.rat()->num) - min_exp(c.rat()->den);
}

// Residue at t = 0 of a t-integral value, in the base field.
std::optional<Value> residue(const Value& c) {
  Field f = c.field();
  Field K = f->base;
  if (c.is_zero()) return Value::zero(K);
  if (t_valuation(c) < 0) return std::nullopt;
  if (t_valuation(c) > 0) return Value::zero(K);
  const int top = f->depth - 1;
  auto at_zero = [&](const MPoly& p) {
    MPoly r;
    for (const auto& t : p)
      if (mpoly::exponent(t.mono, top) == 0) r.push_back(t);
    return r;
  };
  return base_value(K, at_zero(c.rat()->num), at_zero(c.rat()->den));
}

std::optional<QuadraticForm> residue_form(const QuadraticForm& q) {
  Field K = q.field()->base;
  Matrix m(K, q.dim(), q.dim());
  for (size_t i = 0; i < q.dim(); ++i)
    for (size_t j = i; j < q.dim(); ++j) {
      auto r = residue(q.gram_upper()(i, j));
      if (!r) return std::nullopt;
      m(i, j) = *r;
    }
  return QuadraticForm(m);
}

Value t_power(Field f, int e) {
  const Value t = Value::variable(f, f->depth - 1);
  return e >= 0 ? t.pow(static_cast<uint64_t>(e)) : t.pow(static_cast<uint64_t>(-e)).inv();
}

int floor_half(int e) { return e >= 0 ? e / 2 : -((-e + 1) / 2); }

// Automorphisms of K(t) over K used to move a place to t = 0:
// place a >= 0 is t -> t + a (a a constant-field element), place -1 is t -> 1/t.
MPoly shift_poly(Field cf, const MPoly& p, int top, uint32_t a) {
  if (a == 0) return p;
  const MPoly lin = {Term{mpoly::monomial(top, 1), 1}, Term{0, a}};
  std::vector<MPoly> pw = {mpoly::constant(1)};
  MPoly out;
  for (const auto& t : p) {
    const int e = mpoly::exponent(t.mono, top);
    while (static_cast<int>(pw.size()) <= e) pw.push_back(mpoly::mul(cf, pw.back(), lin));
    out = mpoly::add(out, mpoly::scale(cf, pw[static_cast<size_t>(e)], t.coef, t.mono - mpoly::monomial(top, e)));
  }
  return out;
}

MPoly reverse_poly(const MPoly& p, int top, int deg) {
  MPoly out;
  for (const auto& t : p) {
    const int e = mpoly::exponent(t.mono, top);
    out.push_back(Term{t.mono - mpoly::monomial(top, e) + mpoly::monomial(top, deg - e), t.coef});
  }
  std::sort(out.begin(), out.end(), [](const Term& x, const Term& y) { return x.mono > y.mono; });
  return out;
}

Value substitute_top(const Value& c, int place) {
  Field f = c.field();
  if (place == 0 || c.is_zero()) return c;
  const int top = f->depth - 1;
  Field cf = f->constant_field();
  const MPoly& n = c.rat()->num;
  const MPoly& d = c.rat()->den;
  if (place > 0) {
    const auto a = static_cast<uint32_t>(place);
    return Value::from_frac(f, shift_poly(cf, n, top, a), shift_poly(cf, d, top, a));
  }
  const int dn = mpoly::degree(n, top), dd = mpoly::degree(d, top);
  MPoly rn = reverse_poly(n, top, dn), rd = reverse_poly(d, top, dd);
  const int shift = dd - dn;
  if (shift > 0) rn = mpoly::scale(cf, rn, 1, mpoly::monomial(top, shift));
  if (shift < 0) rd = mpoly::scale(cf, rd, 1, mpoly::monomial(top, -shift));
  return Value::from_frac(f, rn, rd);
}

QuadraticForm substitute_form(const QuadraticForm& q, int place) {
  if (place == 0) return q;
  Matrix m(q.field(), q.dim(), q.dim());
  for (size_t i = 0; i < q.dim(); ++i)
    for (size_t j = i; j < q.dim(); ++j) m(i, j) = substitute_top(q.gram_upper()(i, j), place);
  return QuadraticForm(m);
}

std::vector<int> candidate_places(Field f) {
  std::vector<int> places = {0, -1};
  const uint32_t n = std::min<uint32_t>(f->size_finite(), 16);
  for (uint32_t a = 1; a < n; ++a) places.push_back(static_cast<int>(a));
  return places;
}

Matrix p_basis_matrix(const Vec& cs) {
  Field f = cs[0].field();
  std::vector<Vec> cols;
  for (const auto& c : cs) cols.push_back(p_basis_coordinates(c));
  return Matrix::from_columns(f, cols[0].size(), cols);
}

bool exhaustive_anisotropic_small(const QuadraticForm& q) {
  // dim <= 2 over a finite field: check every projective point
  Field f = q.field();
  if (!f->is_finite()) return false;
  if (q.dim() == 0) return true;
  if (q.dim() == 1) return !q.gram_upper()(0, 0).is_zero();
  if (q.dim() != 2) return false;
  const Value one = Value::one(f);
  if (q({Value::zero(f), one}).is_zero()) return false;
  for (uint32_t y = 0; y < f->size_finite(); ++y)
    if (q({one, Value::from_finite(f, y)}).is_zero()) return false;
  return true;
}

// ---------------------------------------------------------------- search

const std::vector<Value>& polynomial_pool(Field f, int height) {
  static std::mutex m;
  static std::map<std::pair<Field, int>, std::vector<Value>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto key = std::make_pair(f, height);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, enumerate_polynomials(f, height)).first;
  return it->second;
}

// Solve a x^2 + b x + c = 0.
std::optional<Value> solve_quadratic(const Value& a, const Value& b, const Value& c) {
  if (a.is_zero()) {
    if (b.is_zero()) return c.is_zero() ? std::optional<Value>(Value::zero(c.field())) : std::nullopt;
    return c / b;
  }
  if (b.is_zero()) return sqrt_if_square(c / a);
  // x = (b/a) y, y^2 + y = a c / b^2
  auto y = artin_schreier_solve(a * c / (b * b));
  if (!y) return std::nullopt;
  return b / a * *y;
}

}  // namespace

std::optional<Vec> detail::search_isotropic(const QuadraticForm& Q, int height,
                                            const std::function<bool(const Vec&)>& accept, size_t budget) {
  Field f = Q.field();
  const size_t n = Q.dim();
  if (n == 0) return std::nullopt;
  const Matrix& M = Q.gram_upper();
  auto offdiag = [&](size_t i, size_t j) { return i < j ? M(i, j) : M(j, i); };
  std::vector<size_t> prefix;  // number of pool entries with level <= L
  const std::vector<Value>* pool;
  std::vector<Value> finite_pool;
  if (f->is_finite()) {
    finite_pool = enumerate(f, 0);
    pool = &finite_pool;
    height = 0;
    prefix.push_back(finite_pool.size());
  } else {
    pool = &polynomial_pool(f, height);
    for (int L = 0; L <= height; ++L) prefix.push_back(static_cast<size_t>(polynomial_count(f, L)));
  }
  size_t evals = 0;
  for (size_t j = 0; j < n; ++j) {
    Vec e = unit_vec(f, n, j);
    if (M(j, j).is_zero() && (!accept || accept(e))) return e;
  }
  for (int L = 0; L <= height; ++L) {
    const size_t lo = L == 0 ? 1 : prefix[static_cast<size_t>(L - 1)];
    const size_t hi = prefix[static_cast<size_t>(L)];
    for (size_t m = 1; m < std::min<size_t>(n, 4); ++m) {
      // supports: choose m free coordinates (combination) and one solved coordinate outside them
      std::vector<size_t> comb(m);
      for (size_t i = 0; i < m; ++i) comb[i] = i;
      for (;;) {
        std::vector<size_t> idx(m, 1);
        for (;;) {
          bool has_level = L == 0;
          for (size_t i = 0; i < m && !has_level; ++i) has_level = idx[i] >= lo;
          bool ok_range = true;
          for (size_t i = 0; i < m; ++i) ok_range = ok_range && idx[i] < hi;
          if (has_level && ok_range) {
            Vec x = zero_vec(f, n);
            for (size_t i = 0; i < m; ++i) x[comb[i]] = (*pool)[idx[i]];
            const Value gamma = Q(x);
            for (size_t j = 0; j < n; ++j) {
              if (std::find(comb.begin(), comb.end(), j) != comb.end()) continue;
              Value beta = Value::zero(f);
              for (size_t i = 0; i < m; ++i)
                if (!offdiag(comb[i], j).is_zero()) beta += offdiag(comb[i], j) * x[comb[i]];
              if (++evals > budget) return std::nullopt;
              auto xj = solve_quadratic(M(j, j), beta, gamma);
              if (!xj) continue;
              Vec y = x;
              y[j] = *xj;
              if (is_zero(y) || !Q(y).is_zero()) continue;
              if (accept && !accept(y)) continue;
              return y;
            }
            if (gamma.is_zero() && (!accept || accept(x))) return x;
          }
          size_t pos = 0;
          while (pos < m && ++idx[pos] >= hi) idx[pos++] = 1;
          if (pos == m) break;
        }
        // next combination
        size_t i = m;
        while (i-- > 0) {
          if (comb[i] < n - m + i) {
            ++comb[i];
            for (size_t k = i + 1; k < m; ++k) comb[k] = comb[k - 1] + 1;
            break;
          }
        }
        if (i == static_cast<size_t>(-1)) break;
      }
    }
  }
  return std::nullopt;
}

using detail::search_isotropic;

Vec p_basis_coordinates(const Value& c) {
  Field f = c.field();
  if (f->is_finite()) return {*sqrt_if_square(c)};
  const int n = f->depth;
  const size_t nb = size_t{1} << n;
  Vec out(nb, Value::zero(f));
  if (c.is_zero()) return out;
  Field cf = f->constant_field();
  const MPoly pd = mpoly::mul(cf, c.rat()->num, c.rat()->den);
  std::vector<MPoly> parts(nb);
  for (const auto& t : pd) {
    size_t eps = 0;
    Mono half = 0;
    for (int l = 0; l < n; ++l) {
      const int e = mpoly::exponent(t.mono, l);
      if (e % 2) eps |= size_t{1} << l;
      half += mpoly::monomial(l, e / 2);
    }
    const Value root = *sqrt_if_square(Value::from_finite(cf, t.coef));
    parts[eps].push_back(Term{half, root.bits()});
  }
  const Value den = Value::from_frac(f, c.rat()->den, mpoly::constant(1));
  for (size_t e = 0; e < nb; ++e) {
    if (parts[e].empty()) continue;
    std::sort(parts[e].begin(), parts[e].end(), [](const Term& a, const Term& b) { return a.mono > b.mono; });
    out[e] = Value::from_frac(f, parts[e], mpoly::constant(1)) / den;
  }
  return out;
}

// ---------------------------------------------------------------- certificates

namespace {

std::optional<AnisotropyCertificate> certify_impl(const QuadraticForm& q);

std::optional<AnisotropyCertificate> degree_parity(const QuadraticForm& q, const NormalForm& nf) {
  // q = Q0 (+) t Q1 with t-integral Q0, Q1 whose residue forms are anisotropic
  Field f = q.field();
  if (f->is_finite()) return std::nullopt;
  const size_t n = q.dim();
  const Matrix& P = nf.witness.T;  // columns: normal-form basis in q-coordinates
  std::vector<Vec> even, odd;
  QuadraticForm Q0 = QuadraticForm::zero(f, 0), Q1 = QuadraticForm::zero(f, 0);
  auto place = [&](int e, std::vector<Vec> vs, const QuadraticForm& unit_piece) {
    auto& dst = e % 2 == 0 ? even : odd;
    dst.insert(dst.end(), vs.begin(), vs.end());
    auto& Q = e % 2 == 0 ? Q0 : Q1;
    Q = Q.orth(unit_piece);
  };
  size_t col = 0;
  for (const auto& [a, b] : nf.blocks) {
    const Vec e = P.column(col), fv = P.column(col + 1);
    col += 2;
    if (a.is_zero()) return std::nullopt;
    // [a,b] on (e, a f + z e) is a[1, ab + z^2 + z]
    Value d = a * b;
    Value z = Value::zero(f);
    if (t_valuation(d) < 0) {
      const Value r = as_class(d).reduced();
      if (!r.is_zero() && t_valuation(r) < 0) return std::nullopt;
      auto zz = artin_schreier_solve(d + r);
      if (!zz) return std::nullopt;
      z = *zz;
      d = r;
    }
    const int v = t_valuation(a);
    const Value lambda = t_power(f, -floor_half(v));
    const Value u = a * t_power(f, -v);
    Vec E = scale(e, lambda);
    Vec F = scale(add(scale(fv, a), scale(e, z)), lambda);
    place(v, {E, F}, QuadraticForm::block(Value::one(f), d).scaled(u));
  }
  for (const auto& c : nf.diagonal) {
    const Vec zv = P.column(col++);
    if (c.is_zero()) return std::nullopt;
    const int v = t_valuation(c);
    place(v, {scale(zv, t_power(f, -floor_half(v)))}, QuadraticForm::diagonal(f, {c * t_power(f, -v)}));
  }
  std::vector<Vec> basis = even;
  basis.insert(basis.end(), odd.begin(), odd.end());
  Matrix B = Matrix::from_columns(f, n, basis);
  auto Binv = inverse(B);
  if (!Binv) return std::nullopt;
  const Value t = Value::variable(f, f->depth - 1);
  AnisotropyCertificate cert;
  cert.kind = Cert::degree_parity;
  cert.witness = *Binv;
  cert.shape = Q0.orth(Q1.scaled(t));
  auto r0 = residue_form(Q0), r1 = residue_form(Q1);
  if (!r0 || !r1) return std::nullopt;
  cert.q0 = *r0;
  cert.q1 = *r1;
  for (const auto* part : {&cert.q0, &cert.q1}) {
    if (part->dim() == 0) continue;
    auto child = certify_impl(*part);
    if (!child) return std::nullopt;
    cert.children.push_back(*child);
  }
  return cert;
}

std::optional<AnisotropyCertificate> certify_impl(const QuadraticForm& q) {
  Field f = q.field();
  NormalForm nf = block_normalize(q);
  const Matrix to_shape = q.dim() ? *inverse(nf.witness.T) : Matrix(f, 0, 0);
  AnisotropyCertificate c;
  c.witness = to_shape;
  c.shape = nf.form;
  if (q.dim() == 0) {
    c.kind = Cert::dimension;
    return c;
  }
  for (const auto& d : nf.diagonal)
    if (d.is_zero()) return std::nullopt;
  for (const auto& [a, b] : nf.blocks)
    if (a.is_zero() || b.is_zero()) return std::nullopt;
  if (f->is_finite()) {
    if (!exhaustive_anisotropic_small(nf.form)) return std::nullopt;
    c.kind = Cert::finite_field_exhaustion;
    return c;
  }
  if (nf.blocks.empty()) {
    if (rank(p_basis_matrix(nf.diagonal)) != nf.diagonal.size()) return std::nullopt;
    c.kind = Cert::radical_anisotropy;
    return c;
  }
  if (nf.blocks.size() == 1 && nf.diagonal.empty()) {
    const auto& [a, b] = nf.blocks[0];
    if (artin_schreier_solve(a * b)) return std::nullopt;
    c.kind = Cert::wp_nonmembership;
    return c;
  }
  for (int place : candidate_places(f)) {
    const QuadraticForm qs = substitute_form(q, place);
    auto cert = place == 0 ? degree_parity(q, nf) : degree_parity(qs, block_normalize(qs));
    if (cert) {
      cert->place = place;
      return cert;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<AnisotropyCertificate> certify_anisotropic(const QuadraticForm& q) {
  auto c = certify_impl(q);
  if (c && !check_anisotropy_certificate(q, *c)) throw std::logic_error("anisotropy certificate failed its check");
  return c;
}

bool check_anisotropy_certificate(const QuadraticForm& q, const AnisotropyCertificate& c) {
  Field f = q.field();
  if (q.dim() == 0) return true;
  if (c.place != 0 && (c.kind != Cert::degree_parity || f->is_finite())) return false;
  if (!check_isometry(c.place ? substitute_form(q, c.place) : q, c.shape, c.witness)) return false;
  const Matrix& S = c.shape.gram_upper();
  switch (c.kind) {
    case Cert::finite_field_exhaustion:
      return f->is_finite() && exhaustive_anisotropic_small(c.shape);
    case Cert::radical_anisotropy: {
      if (!c.shape.is_quasilinear()) return false;
      Vec d;
      for (size_t i = 0; i < c.shape.dim(); ++i) {
        if (S(i, i).is_zero()) return false;
        d.push_back(S(i, i));
      }
      return rank(p_basis_matrix(d)) == d.size();
    }
    case Cert::wp_nonmembership: {
      if (c.shape.dim() != 2 || !S(0, 1).is_one() || S(0, 0).is_zero()) return false;
      return !artin_schreier_solve(S(0, 0) * S(1, 1)).has_value();
    }
    case Cert::degree_parity: {
      if (f->is_finite() || c.q0.field() != f->base || c.q1.field() != f->base) return false;
      const size_t n0 = c.q0.dim(), n1 = c.q1.dim();
      if (n0 + n1 != c.shape.dim()) return false;
      const Value t = Value::variable(f, f->depth - 1);
      Matrix M0(f, n0, n0), M1(f, n1, n1);
      for (size_t i = 0; i < c.shape.dim(); ++i)
        for (size_t j = i; j < c.shape.dim(); ++j) {
          const Value& x = S(i, j);
          if (i < n0 && j >= n0) {
            if (!x.is_zero()) return false;
          } else if (j < n0) {
            M0(i, j) = x;
          } else {
            M1(i - n0, j - n0) = x / t;
          }
        }
      auto r0 = residue_form(QuadraticForm(M0)), r1 = residue_form(QuadraticForm(M1));
      if (!r0 || !r1 || *r0 != c.q0 || *r1 != c.q1) return false;
      size_t k = 0;
      for (const auto* part : {&c.q0, &c.q1}) {
        if (part->dim() == 0) continue;
        if (k >= c.children.size() || !check_anisotropy_certificate(*part, c.children[k])) return false;
        ++k;
      }
      return k == c.children.size();
    }
    default:
      return false;
  }
}

// ---------------------------------------------------------------- isotropy

namespace {

Verdict<Vec> yes_in_q(const NormalForm& nf, const QuadraticForm& q, const Vec& v_nf) {
  Vec v = nf.witness.T.apply(v_nf);
  if (is_zero(v) || !q(v).is_zero()) throw std::logic_error("isotropic vector failed verification");
  return Verdict<Vec>::yes(v);
}

Verdict<Vec> isotropic_finite(const QuadraticForm& q, const NormalForm& nf) {
  Field f = q.field();
  const size_t n = q.dim();
  const size_t r = nf.blocks.size();
  // coordinates in the normal form: blocks first (e_i at 2i, f_i at 2i+1), then diagonal
  for (size_t i = 0; i < r; ++i) {
    if (nf.blocks[i].first.is_zero()) return yes_in_q(nf, q, unit_vec(f, n, 2 * i));
    if (nf.blocks[i].second.is_zero()) return yes_in_q(nf, q, unit_vec(f, n, 2 * i + 1));
  }
  const size_t s = nf.diagonal.size();
  for (size_t k = 0; k < s; ++k)
    if (nf.diagonal[k].is_zero()) return yes_in_q(nf, q, unit_vec(f, n, 2 * r + k));
  if (s >= 2) {
    Vec v = zero_vec(f, n);
    v[2 * r] = *sqrt_if_square(nf.diagonal[1]);
    v[2 * r + 1] = *sqrt_if_square(nf.diagonal[0]);
    return yes_in_q(nf, q, v);
  }
  if (r >= 1 && s == 1) {
    Vec v = zero_vec(f, n);
    v[0] = *sqrt_if_square(nf.diagonal[0] / nf.blocks[0].first);
    v[2 * r] = Value::one(f);
    return yes_in_q(nf, q, v);
  }
  if (r >= 2) {
    // [a,b] represents c = q(e_2): a x^2 + x y + b y^2 = c
    const auto& [a, b] = nf.blocks[0];
    const Value c = nf.blocks[1].first;
    Vec v = zero_vec(f, n);
    auto u = artin_schreier_solve(a * (b + c));
    if (u) {
      v[0] = *u / a;
      v[1] = Value::one(f);
    } else {
      v[0] = *sqrt_if_square(c / a);
    }
    v[2] = Value::one(f);
    return yes_in_q(nf, q, v);
  }
  if (r == 1) {
    const auto& [a, b] = nf.blocks[0];
    auto u = artin_schreier_solve(a * b);
    if (u) {
      Vec v = zero_vec(f, n);
      v[0] = *u / a;
      v[1] = Value::one(f);
      return yes_in_q(nf, q, v);
    }
  }
  auto cert = certify_anisotropic(q);
  if (!cert) throw std::logic_error("finite-field anisotropy without certificate");
  auto v = Verdict<Vec>::no(Cert::finite_field_exhaustion);
  v.anisotropy = std::make_shared<AnisotropyCertificate>(*cert);
  return v;
}

}  // namespace

Verdict<Vec> isotropic_vector(const QuadraticForm& q, int height) {
  Field f = q.field();
  if (q.dim() == 0) return Verdict<Vec>::no(Cert::dimension, "zero-dimensional form");
  NormalForm nf = block_normalize(q);
  if (f->is_finite()) return isotropic_finite(q, nf);
  const size_t n = q.dim();
  const size_t r = nf.blocks.size();
  for (size_t i = 0; i < r; ++i) {
    if (nf.blocks[i].first.is_zero()) return yes_in_q(nf, q, unit_vec(f, n, 2 * i));
    if (nf.blocks[i].second.is_zero()) return yes_in_q(nf, q, unit_vec(f, n, 2 * i + 1));
  }
  if (!nf.diagonal.empty()) {
    auto ker = kernel(p_basis_matrix(nf.diagonal));
    if (!ker.empty()) {
      Vec v = zero_vec(f, n);
      for (size_t k = 0; k < nf.diagonal.size(); ++k) v[2 * r + k] = ker[0][k];
      return yes_in_q(nf, q, v);
    }
  }
  if (r == 1 && nf.diagonal.empty()) {
    const auto& [a, b] = nf.blocks[0];
    auto u = artin_schreier_solve(a * b);
    if (u) {
      Vec v = zero_vec(f, n);
      v[0] = *u / a;
      v[1] = Value::one(f);
      return yes_in_q(nf, q, v);
    }
  }
  if (auto cert = certify_anisotropic(q)) {
    auto v = Verdict<Vec>::no(cert->kind);
    v.anisotropy = std::make_shared<AnisotropyCertificate>(*cert);
    return v;
  }
  if (auto v = search_isotropic(nf.form, height, nullptr)) return yes_in_q(nf, q, *v);
  return Verdict<Vec>::unknown(height, "bounded search exhausted");
}

// ---------------------------------------------------------------- splitting

namespace {

struct Splitting {
  std::vector<std::pair<Vec, Vec>> planes;  // q-coordinates
  std::vector<Vec> radical_isotropic;       // q-coordinates
  Matrix rest;                              // columns span the remaining subspace
  Verdict<Vec> residual;
};

Splitting split_isotropic(const QuadraticForm& q, int height, bool allow_radical) {
  Field f = q.field();
  Splitting s;
  Matrix W = Matrix::identity(f, q.dim());
  for (;;) {
    if (W.cols() == 0) {
      s.residual = Verdict<Vec>::no(Cert::dimension, "zero-dimensional form");
      break;
    }
    const QuadraticForm qW = q.transform(W);
    auto iso = isotropic_vector(qW, height);
    if (!iso.is_yes()) {
      s.residual = iso;
      break;
    }
    const Vec x = *iso.witness;
    const Matrix BW = qW.polar_gram();
    const Vec bx = BW.apply(x);
    if (is_zero(bx)) {
      if (!allow_radical) throw Error(Error::Kind::degenerate_input, "isotropic radical vector: degenerate form");
      s.radical_isotropic.push_back(W.apply(x));
      // any complement of x inside W
      auto basis = extend_to_basis(f, W.cols(), {x});
      basis.erase(basis.begin());
      W = W * Matrix::from_columns(f, W.cols(), basis);
      continue;
    }
    size_t i = 0;
    while (bx[i].is_zero()) ++i;
    Vec w = scale(unit_vec(f, W.cols(), i), bx[i].inv());
    w = add(w, scale(x, qW(w)));
    s.planes.emplace_back(W.apply(x), W.apply(w));
    W = complement_of(W, {bx, BW.apply(w)});
  }
  s.rest = W;
  return s;
}

}  // namespace

WittDecomposition witt_decompose(const QuadraticForm& q, int height) {
  Field f = q.field();
  auto an = analyze(q);
  if (an.classification == Classification::degenerate)
    throw Error(Error::Kind::degenerate_input, "Witt decomposition needs a nondegenerate form");
  Splitting s = split_isotropic(q, height, false);
  WittDecomposition wd;
  wd.index = s.planes.size();
  wd.planes = s.planes;
  wd.residual = s.residual;
  const QuadraticForm rest = q.transform(s.rest);
  std::vector<Vec> basis;
  QuadraticForm target = QuadraticForm::zero(f, 0);
  for (const auto& [v, w] : s.planes) {
    basis.push_back(v);
    basis.push_back(w);
    target = target.orth(QuadraticForm::hyperbolic(f));
  }
  if (rest.dim() > 0) {
    NormalForm nf = block_normalize(rest);
    const Matrix cols = s.rest * nf.witness.T;
    for (size_t j = 0; j < cols.cols(); ++j) basis.push_back(cols.column(j));
    wd.anisotropic_part = nf.form;
    target = target.orth(nf.form);
    // move the residual certificate from rest to the normalized part
    if (wd.residual.anisotropy) {
      AnisotropyCertificate c = *wd.residual.anisotropy;
      Matrix T = nf.witness.T;
      if (c.place != 0)
        for (size_t i = 0; i < T.rows(); ++i)
          for (size_t j = 0; j < T.cols(); ++j) T(i, j) = substitute_top(T(i, j), c.place);
      c.witness = c.witness * T;
      if (!check_anisotropy_certificate(nf.form, c)) throw std::logic_error("residual certificate transfer failed");
      wd.residual.anisotropy = std::make_shared<const AnisotropyCertificate>(std::move(c));
    }
  } else {
    wd.anisotropic_part = QuadraticForm::zero(f, 0);
  }
  if (q.dim() == 0) {
    wd.witness = {q, q, Matrix(f, 0, 0)};
    return wd;
  }
  wd.witness = IsometryWitness{target, q, Matrix::from_columns(f, q.dim(), basis)}.inverse();
  if (!wd.witness.verify()) throw std::logic_error("Witt decomposition witness failed");
  return wd;
}

// ---------------------------------------------------------------- isometry

namespace {

// Canonical form over a finite field with a witness q -> canonical.
IsometryWitness canonical_finite(const QuadraticForm& q) {
  Field f = q.field();
  const size_t n = q.dim();
  NormalForm nf = block_normalize(q);
  const Matrix& P = nf.witness.T;
  const size_t r = nf.blocks.size();
  // radical: one vector of value 1 (if any nonzero value) and the rest of value 0
  std::vector<Vec> rad;
  for (size_t k = 0; k < nf.diagonal.size(); ++k) rad.push_back(P.column(2 * r + k));
  std::optional<Vec> unit;
  std::vector<Vec> zeros;
  size_t p = nf.diagonal.size();
  for (size_t k = 0; k < nf.diagonal.size(); ++k)
    if (!nf.diagonal[k].is_zero()) {
      p = k;
      break;
    }
  if (p < nf.diagonal.size()) {
    const Value rc = *sqrt_if_square(nf.diagonal[p]);
    unit = scale(rad[p], rc.inv());
    for (size_t k = 0; k < rad.size(); ++k) {
      if (k == p) continue;
      zeros.push_back(add(rad[k], scale(*unit, *sqrt_if_square(nf.diagonal[k]))));
    }
  } else {
    zeros = rad;
  }
  // nonsingular part
  std::vector<Vec> ns;
  for (size_t k = 0; k < 2 * r; ++k) ns.push_back(P.column(k));
  std::vector<std::pair<Vec, Vec>> planes;
  std::optional<std::pair<Vec, Vec>> aniso;
  if (!ns.empty()) {
    const Matrix N = Matrix::from_columns(f, n, ns);
    Splitting s = split_isotropic(q.transform(N), 0, false);
    for (const auto& [v, w] : s.planes) planes.emplace_back(N.apply(v), N.apply(w));
    if (s.rest.cols() == 2) aniso = std::make_pair(N.apply(s.rest.column(0)), N.apply(s.rest.column(1)));
  }
  if (aniso && unit) {
    // [a,b] (+) <1> is isotropic over a finite field: trade it for H (+) <1>
    const Matrix S = Matrix::from_columns(f, n, {aniso->first, aniso->second, *unit});
    Splitting s = split_isotropic(q.transform(S), 0, true);
    if (s.planes.size() != 1 || s.rest.cols() != 1) throw std::logic_error("finite canonical form: unexpected split");
    planes.emplace_back(S.apply(s.planes[0].first), S.apply(s.planes[0].second));
    Vec u = S.apply(s.rest.column(0));
    unit = scale(u, sqrt_if_square(q(u))->inv());
    aniso.reset();
  }
  std::vector<Vec> basis;
  QuadraticForm target = QuadraticForm::zero(f, 0);
  for (const auto& [v, w] : planes) {
    basis.push_back(v);
    basis.push_back(w);
    target = target.orth(QuadraticForm::hyperbolic(f));
  }
  if (aniso) {
    const Matrix A = Matrix::from_columns(f, n, {aniso->first, aniso->second});
    NormalForm na = block_normalize(q.transform(A));
    const Vec e = A.apply(na.witness.T.column(0)), fv = A.apply(na.witness.T.column(1));
    const Value a = na.blocks[0].first, b = na.blocks[0].second;
    const Value delta = canonical_trace_one(f);
    auto z = artin_schreier_solve(a * b + delta);
    if (!z) throw std::logic_error("finite canonical form: Arf mismatch");
    const Value lambda = sqrt_if_square(a)->inv();
    basis.push_back(scale(e, lambda));
    basis.push_back(scale(add(scale(fv, a), scale(e, *z)), lambda));
    target = target.orth(QuadraticForm::block(Value::one(f), delta));
  }
  Vec diag;
  if (unit) {
    basis.push_back(*unit);
    diag.push_back(Value::one(f));
  }
  for (const auto& z : zeros) {
    basis.push_back(z);
    diag.push_back(Value::zero(f));
  }
  if (!diag.empty()) target = target.orth(QuadraticForm::diagonal(f, diag));
  if (n == 0) return {q, q, Matrix(f, 0, 0)};
  IsometryWitness w = IsometryWitness{target, q, Matrix::from_columns(f, n, basis)}.inverse();
  if (!w.verify()) throw std::logic_error("finite canonical form witness failed");
  return w;
}

// F^2-span of the values of q on its radical, as a p-basis coordinate matrix.
std::optional<Matrix> radical_values(const QuadraticForm& q) {
  NormalForm nf = block_normalize(q);
  if (nf.diagonal.empty()) return std::nullopt;
  return p_basis_matrix(nf.diagonal);
}

// Isometry between q1 and q2 read off a totally isotropic graph subspace of q1 (+) q2.
std::optional<IsometryWitness> graph_isometry(const QuadraticForm& q1, const QuadraticForm& q2, int height) {
  Field f = q1.field();
  const size_t n = q1.dim();
  if (n == 0) return IsometryWitness{q1, q2, Matrix(f, 0, 0)};
  Splitting s;
  try {
    s = split_isotropic(q1.orth(q2), height, true);
  } catch (const Error&) {
    return std::nullopt;
  }
  std::vector<Vec> U = s.radical_isotropic;
  for (const auto& [v, w] : s.planes) U.push_back(v);
  if (U.size() < n) return std::nullopt;
  U.resize(n);
  Matrix X(f, n, n), Y(f, n, n);
  for (size_t j = 0; j < n; ++j)
    for (size_t i = 0; i < n; ++i) {
      X(i, j) = U[j][i];
      Y(i, j) = U[j][n + i];
    }
  auto Xi = inverse(X);
  if (!Xi) return std::nullopt;
  Matrix T = Y * *Xi;
  if (!check_isometry(q1, q2, T)) return std::nullopt;
  return IsometryWitness{q1, q2, T};
}

}  // namespace

Verdict<IsometryWitness> is_isometric(const QuadraticForm& q1, const QuadraticForm& q2, int height) {
  using V = Verdict<IsometryWitness>;
  if (q1.dim() && q2.dim() && q1.field() != q2.field())
    throw Error(Error::Kind::field_mismatch, "is_isometric over different fields");
  Field f = q1.dim() ? q1.field() : q2.field();
  if (q1.dim() != q2.dim()) return V::no(Cert::dimension, "dimensions differ");
  if (q1 == q2) return V::yes(IsometryWitness{q1, q2, Matrix::identity(f, q1.dim())});
  auto a1 = analyze(q1), a2 = analyze(q2);
  if (a1.radical_dim != a2.radical_dim) return V::no(Cert::invariant_separation, "radical dimensions differ");
  if (f->is_finite()) {
    auto c1 = canonical_finite(q1), c2 = canonical_finite(q2);
    if (c1.target == c2.target) {
      auto w = c1.then(c2.inverse());
      if (!w.verify()) throw std::logic_error("isometry witness failed");
      return V::yes(w);
    }
    return V::no(Cert::finite_field_exhaustion, "canonical forms differ");
  }
  // quasilinear parts
  auto r1 = radical_values(q1), r2 = radical_values(q2);
  if (r1 && r2) {
    std::vector<Vec> cols;
    for (size_t j = 0; j < r1->cols(); ++j) cols.push_back(r1->column(j));
    for (size_t j = 0; j < r2->cols(); ++j) cols.push_back(r2->column(j));
    const size_t joint = rank(Matrix::from_columns(f, r1->rows(), cols));
    if (rank(*r1) != joint || rank(*r2) != joint)
      return V::no(Cert::invariant_separation, "quasilinear parts span different F^2-spaces");
  }
  if (a1.classification == Classification::nonsingular && arf(q1) != arf(q2))
    return V::no(Cert::invariant_separation, "Arf invariants differ");
  const bool nondeg = a1.classification != Classification::degenerate && a2.classification != Classification::degenerate;
  if (!nondeg) {
    if (auto w = graph_isometry(q1, q2, height)) return V::yes(*w);
    return V::unknown(height, "degenerate forms: no witness found");
  }
  auto w1 = witt_decompose(q1, height), w2 = witt_decompose(q2, height);
  if (w1.index != w2.index) {
    if (w1.residual.is_no() && w2.residual.is_no()) return V::no(Cert::invariant_separation, "Witt indices differ");
    return V::unknown(height, "Witt indices not settled");
  }
  const QuadraticForm& A1 = w1.anisotropic_part;
  const QuadraticForm& A2 = w2.anisotropic_part;
  std::optional<IsometryWitness> mid;
  if (A1 == A2) mid = IsometryWitness{A1, A2, Matrix::identity(f, A1.dim())};
  else mid = graph_isometry(A1, A2, height);
  if (mid) {
    Matrix T = Matrix::identity(f, 2 * w1.index).direct_sum(mid->T);
    IsometryWitness middle{w1.witness.target, w2.witness.target, T};
    auto w = w1.witness.then(middle).then(w2.witness.inverse());
    if (!w.verify()) throw std::logic_error("isometry witness failed");
    return V::yes(w);
  }
  if (w1.residual.is_no() && w2.residual.is_no() && a1.classification == Classification::nonsingular) {
    // A1 = A2 iff A1 (+) A2 is hyperbolic
    auto wsum = witt_decompose(A1.orth(A2), height);
    if (wsum.residual.is_no() && wsum.index < A1.dim())
      return V::no(Cert::invariant_separation, "anisotropic parts differ in the Witt group");
  }
  return V::unknown(height, "no witness found");
}

// ---------------------------------------------------------------- values

Verdict<Vec> represents(const QuadraticForm& q, const Value& c, int height) {
  Field f = q.field();
  if (c.field() != f) throw Error(Error::Kind::field_mismatch, "represents over different fields");
  if (c.is_zero()) return isotropic_vector(q, height);
  Matrix W = Matrix::identity(f, q.dim());
  for (;;) {
    const QuadraticForm qW = q.transform(W);
    const size_t m = qW.dim();
    const QuadraticForm ext = qW.orth(QuadraticForm::diagonal(f, {c}));
    // direct search first, insisting on a nonzero last coordinate
    if (!f->is_finite()) {
      auto v = search_isotropic(ext, height, [&](const Vec& x) { return !x[m].is_zero(); }, kSearchBudget / 4);
      if (v) {
        Vec x(v->begin(), v->begin() + static_cast<long>(m));
        Vec out = W.apply(scale(x, (*v)[m].inv()));
        if (q(out) != c) throw std::logic_error("represented value failed verification");
        return Verdict<Vec>::yes(out);
      }
    }
    auto iso = isotropic_vector(ext, height);
    if (iso.is_no()) {
      auto r = Verdict<Vec>::no(iso.cert, "q (+) <c> is anisotropic");
      r.anisotropy = iso.anisotropy;
      return r;
    }
    if (iso.is_unknown()) return Verdict<Vec>::unknown(height, iso.detail);
    const Vec& v = *iso.witness;
    Vec x(v.begin(), v.begin() + static_cast<long>(m));
    if (!v[m].is_zero()) {
      Vec out = W.apply(scale(x, v[m].inv()));
      if (q(out) != c) throw std::logic_error("represented value failed verification");
      return Verdict<Vec>::yes(out);
    }
    const Vec bx = qW.polar_gram().apply(x);
    if (!is_zero(bx)) {
      size_t i = 0;
      while (bx[i].is_zero()) ++i;
      Vec w = scale(unit_vec(f, m, i), bx[i].inv());
      w = add(w, scale(x, qW(w)));
      Vec out = W.apply(add(w, scale(x, c)));
      if (q(out) != c) throw std::logic_error("represented value failed verification");
      return Verdict<Vec>::yes(out);
    }
    auto basis = extend_to_basis(f, m, {x});
    basis.erase(basis.begin());
    if (basis.empty()) return Verdict<Vec>::no(Cert::structural, "form is zero");
    W = W * Matrix::from_columns(f, m, basis);
  }
}

namespace {

// Vectors u with b(u, prev_j) = B_j and q(u) = target, searched in an affine space.
struct Embedder {
  const QuadraticForm& q;
  const QuadraticForm& sub;
  int height;
  size_t nodes = 0;
  bool exhaustive = true;

  std::vector<Vec> candidates(const std::vector<Vec>& prev, size_t i) {
    Field f = q.field();
    const size_t n = q.dim();
    const Matrix Bq = q.polar_gram();
    const Matrix Bs = sub.polar_gram();
    const Value target = sub.gram_upper()(i, i);
    // linear constraints b(u, prev_j) = Bs(j, i)
    std::vector<Vec> rows;
    Vec rhs;
    for (size_t j = 0; j < prev.size(); ++j) {
      rows.push_back(Bq.apply(prev[j]));
      rhs.push_back(Bs(j, i));
    }
    Vec u0 = zero_vec(f, n);
    std::vector<Vec> dirs;
    if (!rows.empty()) {
      Matrix A = Matrix::from_rows(f, rows);
      auto sol = solve(A, rhs);
      if (!sol) return {};
      u0 = *sol;
      dirs = kernel(A);
    } else {
      for (size_t k = 0; k < n; ++k) dirs.push_back(unit_vec(f, n, k));
    }
    std::vector<Vec> out;
    auto independent = [&](const Vec& u) {
      std::vector<Vec> all = prev;
      all.push_back(u);
      return rank(Matrix::from_columns(f, n, all)) == all.size();
    };
    if (f->is_finite()) {
      // enumerate the affine space when small
      const uint64_t q_size = f->size_finite();
      uint64_t total = 1;
      for (size_t k = 0; k < dirs.size(); ++k) {
        total *= q_size;
        if (total > (1u << 16)) {
          exhaustive = false;
          break;
        }
      }
      if (total <= (1u << 16)) {
        std::vector<uint32_t> idx(dirs.size(), 0);
        for (uint64_t it = 0; it < total; ++it) {
          Vec u = u0;
          for (size_t k = 0; k < dirs.size(); ++k)
            if (idx[k]) u = add(u, scale(dirs[k], Value::from_finite(f, idx[k])));
          if (q(u) == target && independent(u)) out.push_back(u);
          size_t pos = 0;
          while (pos < idx.size() && ++idx[pos] == q_size) idx[pos++] = 0;
        }
        return out;
      }
    }
    exhaustive = false;
    // homogenize: Q(y, z) = q(z u0 + D y) + target z^2, want z != 0
    const size_t m = dirs.size();
    std::vector<Vec> cols = dirs;
    cols.push_back(u0);
    Matrix D = Matrix::from_columns(f, n, cols);
    QuadraticForm Q = q.transform(D);
    Matrix G = Q.gram_upper();
    G(m, m) += target;
    QuadraticForm H(G);
    auto v = search_isotropic(H, height, [&](const Vec& x) { return !x[m].is_zero(); }, kSearchBudget / 8);
    if (v) {
      Vec u = D.apply(scale(*v, (*v)[m].inv()));
      if (q(u) == target && independent(u)) out.push_back(u);
    }
    return out;
  }

  std::optional<Matrix> run(std::vector<Vec>& prev) {
    const size_t i = prev.size();
    if (i == sub.dim()) return Matrix::from_columns(q.field(), q.dim(), prev);
    if (++nodes > 2000) {
      exhaustive = false;
      return std::nullopt;
    }
    for (const auto& u : candidates(prev, i)) {
      prev.push_back(u);
      auto r = run(prev);
      if (r) return r;
      prev.pop_back();
    }
    return std::nullopt;
  }
};

}  // namespace

Verdict<Matrix> dominates(const QuadraticForm& q, const QuadraticForm& sub, int height) {
  if (sub.dim() && q.dim() && sub.field() != q.field())
    throw Error(Error::Kind::field_mismatch, "dominates over different fields");
  if (sub.dim() > q.dim()) return Verdict<Matrix>::no(Cert::dimension, "subform is larger");
  Embedder e{q, sub, height};
  std::vector<Vec> prev;
  auto E = e.run(prev);
  if (E) {
    if (!check_embedding(sub, q, *E)) throw std::logic_error("embedding failed verification");
    return Verdict<Matrix>::yes(*E);
  }
  if (e.exhaustive && q.field()->is_finite()) return Verdict<Matrix>::no(Cert::finite_field_exhaustion);
  return Verdict<Matrix>::unknown(height, "no embedding found");
}

}  // namespace qfc2
