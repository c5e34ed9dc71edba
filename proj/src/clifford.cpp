#include "qfc2/clifford.hpp"

#include <algorithm>
#include <bit>
#include <map>

namespace qfc2 {

namespace {

Error precondition(const std::string& msg) { return Error(Error::Kind::precondition_failed, msg); }

using Sparse = std::map<uint32_t, Value>;

void accumulate(Sparse& acc, uint32_t m, const Value& c) {
  if (c.is_zero()) return;
  auto [it, fresh] = acc.emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second.is_zero()) acc.erase(it);
  }
}

// Products in the full Clifford algebra on sorted monomials e_S.
class Straightener {
 public:
  explicit Straightener(const QuadraticForm& q) : q_(q), polar_(q.polar_gram()) {}

  // e_S e_j
  Sparse times_generator(uint32_t S, size_t j) const {
    Field f = q_.field();
    Sparse out;
    const uint32_t bit = 1u << j;
    if (S == 0) {
      out.emplace(bit, Value::one(f));
      return out;
    }
    const size_t m = 31 - std::countl_zero(S);
    const uint32_t rest = S ^ (1u << m);
    if (m < j) {
      out.emplace(S | bit, Value::one(f));
    } else if (m == j) {
      accumulate(out, rest, q_.gram_upper()(j, j));
    } else {
      // e_m e_j = b(e_j, e_m) + e_j e_m
      accumulate(out, rest, polar_(j, m));
      for (const auto& [T, c] : times_generator(rest, j)) accumulate(out, T | (1u << m), c);
    }
    return out;
  }

  Sparse times(const Sparse& x, size_t j) const {
    Sparse out;
    for (const auto& [S, c] : x)
      for (const auto& [T, d] : times_generator(S, j)) accumulate(out, T, c * d);
    return out;
  }

  Sparse word(const std::vector<size_t>& w) const {
    Sparse x;
    x.emplace(0u, Value::one(q_.field()));
    for (size_t j : w) x = times(x, j);
    return x;
  }

  Sparse mono_product(uint32_t S, uint32_t T) const {
    Sparse x;
    x.emplace(S, Value::one(q_.field()));
    for (size_t j = 0; j < 32; ++j)
      if (T >> j & 1u) x = times(x, j);
    return x;
  }

 private:
  const QuadraticForm& q_;
  Matrix polar_;
};

std::vector<size_t> elements(uint32_t m) {
  std::vector<size_t> out;
  for (size_t j = 0; j < 32; ++j)
    if (m >> j & 1u) out.push_back(j);
  return out;
}

Vec to_vec(const EvenClifford& C, const Sparse& x) {
  Vec v = zero_vec(C.form.field(), C.subsets.size());
  for (const auto& [S, c] : x) v[C.index_of(S)] = c;
  return v;
}

Vec vector_product(const EvenClifford& C, const Straightener& st, const Vec& x, const Vec& y) {
  Sparse acc;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i].is_zero()) continue;
    for (size_t j = 0; j < y.size(); ++j) {
      if (y[j].is_zero()) continue;
      for (const auto& [T, c] : st.mono_product(1u << i, 1u << j)) accumulate(acc, T, c * x[i] * y[j]);
    }
  }
  return to_vec(C, acc);
}

Matrix right_matrix(const Algebra& A, const Vec& a) {
  std::vector<Vec> cols;
  for (size_t i = 0; i < A.dim(); ++i) cols.push_back(A.mul(A.basis(i), a));
  return Matrix::from_columns(A.field(), A.dim(), cols);
}

/// c with y = c * e, if any.
std::optional<Value> multiple_of(const Vec& y, const Vec& e) {
  std::optional<Value> c;
  for (size_t i = 0; i < e.size(); ++i) {
    if (e[i].is_zero()) continue;
    c = y[i] / e[i];
    break;
  }
  if (!c || scale(e, *c) != y) return std::nullopt;
  return c;
}

std::vector<Vec> with_pair_sums(const std::vector<Vec>& vs) {
  std::vector<Vec> out = vs;
  for (size_t i = 0; i < vs.size(); ++i)
    for (size_t j = i + 1; j < vs.size(); ++j) out.push_back(add(vs[i], vs[j]));
  return out;
}

/// Candidate scalars: ratios of values of the forms on basis vectors, then small field elements.
std::vector<Value> ratio_candidates(const QuadraticForm& num, const QuadraticForm& den, int height, size_t cap) {
  Field f = num.field();
  std::vector<Value> out;
  auto push = [&](const Value& c) {
    if (out.size() >= cap || c.is_zero()) return;
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  };
  push(Value::one(f));
  for (size_t i = 0; i < num.dim(); ++i) {
    const Value a = num(unit_vec(f, num.dim(), i));
    if (a.is_zero()) continue;
    for (size_t j = 0; j < den.dim(); ++j) {
      const Value b = den(unit_vec(f, den.dim(), j));
      if (!b.is_zero()) push(a / b);
    }
  }
  for (const Value& c : enumerate(f, f->is_finite() ? height : std::min(height, 1))) push(c);
  return out;
}

QuadraticForm pfister_times(const Value& lambda, const QuadraticForm& q) { return q.orth(q.scaled(lambda)); }

}  // namespace

// ---- EvenClifford

size_t EvenClifford::index_of(uint32_t mask) const {
  auto it = std::find(subsets.begin(), subsets.end(), mask);
  if (it == subsets.end()) throw std::logic_error("not an even subset");
  return static_cast<size_t>(it - subsets.begin());
}

Vec EvenClifford::product(const Vec& x, const Vec& y) const {
  if (x.size() != form.dim() || y.size() != form.dim()) throw precondition("vectors of the wrong size");
  return vector_product(*this, Straightener(form), x, y);
}

EvenClifford even_clifford(const QuadraticForm& rho) {
  const size_t n = rho.dim();
  if (n < 3 || n > 6)
    throw Error(Error::Kind::unsupported, "DimensionUnsupported: even Clifford algebras need 3 <= dim <= 6, got " +
                                              std::to_string(n));
  const Analysis an = analyze(rho);
  if (an.classification == Classification::degenerate || an.radical_dim > n % 2)
    throw Error(Error::Kind::degenerate_input, "Degenerate: " + rho.to_string());
  Field f = rho.field();
  EvenClifford C;
  C.form = rho;
  for (uint32_t m = 0; m < (1u << n); ++m)
    if (std::popcount(m) % 2 == 0) C.subsets.push_back(m);
  std::sort(C.subsets.begin(), C.subsets.end(), [](uint32_t a, uint32_t b) {
    if (std::popcount(a) != std::popcount(b)) return std::popcount(a) < std::popcount(b);
    const auto ea = elements(a), eb = elements(b);
    return std::lexicographical_compare(ea.begin(), ea.end(), eb.begin(), eb.end());
  });
  const Straightener st(rho);
  const size_t N = C.subsets.size();

  Algebra::Data d;
  d.field = f;
  d.degree = n == 3 ? 2 : n == 5 ? 4 : 0;
  d.name = "C0(" + rho.to_string() + ")";
  for (uint32_t S : C.subsets) {
    std::string label;
    for (size_t j : elements(S)) label += "e" + std::to_string(j + 1);
    d.labels.push_back(label.empty() ? "1" : label);
  }
  for (uint32_t S : C.subsets)
    for (uint32_t T : C.subsets) {
      Algebra::Product p;
      for (const auto& [U, c] : st.mono_product(S, T)) p.push_back({C.index_of(U), c});
      std::sort(p.begin(), p.end(), [](const auto& x, const auto& y) { return x.index < y.index; });
      d.table.push_back(std::move(p));
    }
  d.one = unit_vec(f, N, 0);
  std::vector<Vec> cols;
  for (uint32_t S : C.subsets) {
    auto w = elements(S);
    std::reverse(w.begin(), w.end());
    cols.push_back(to_vec(C, st.word(w)));
  }
  d.involution = Matrix::from_columns(f, N, cols);

  // z isotropic, b(z, w) = 1: e = z w is idempotent with tau_0(e) = 1 + e
  const QuadraticForm& q = rho;
  for (uint32_t bits = 1; bits < (1u << n); ++bits) {
    Vec z = zero_vec(f, n);
    for (size_t i = 0; i < n; ++i)
      if (bits >> i & 1u) z[i] = Value::one(f);
    if (!q(z).is_zero()) continue;
    for (size_t k = 0; k < n; ++k) {
      const Value c = q.polar(z, unit_vec(f, n, k));
      if (c.is_zero()) continue;
      const Vec e = vector_product(C, st, z, scale(unit_vec(f, n, k), c.inv()));
      d.hyperbolic_hints.push_back(e);
      d.isotropic_hints.push_back(e);
      break;
    }
    if (d.hyperbolic_hints.size() >= 4) break;
  }

  Alg A = Algebra::make(d);
  if (!is_associative(*A)) throw std::logic_error("even Clifford algebra is not associative");
  const size_t zdim = center_basis(*A).size();
  if (zdim != (n % 2 == 1 ? 1u : 2u))
    throw std::logic_error("even Clifford algebra has a center of dimension " + std::to_string(zdim));
  if (n == 3 || n == 5) {
    // Trd(y) = Trp(y + tau_0(y)) for a symplectic involution
    Vec trd;
    std::optional<PfaffianData> P;
    if (n == 5) P = pfaffian(A);
    for (size_t i = 0; i < N; ++i) {
      const Vec y = add(A->basis(i), A->sigma(A->basis(i)));
      if (P) {
        trd.push_back(P->trp_of(y));
      } else {
        auto c = A->as_scalar(y);
        if (!c) throw std::logic_error("x + tau_0(x) is not central in a quaternion algebra");
        trd.push_back(*c);
      }
    }
    d.trd = trd;
    A = Algebra::make(std::move(d));
  }
  C.algebra = A;
  return C;
}

std::vector<Vec> center_basis(const Algebra& A) {
  const size_t n = A.dim();
  Matrix M(A.field(), n * n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      const Vec c = add(A.mul(A.basis(j), A.basis(i)), A.mul(A.basis(i), A.basis(j)));
      for (size_t k = 0; k < n; ++k) M(i * n + k, j) = c[k];
    }
  return kernel(M);
}

// ---- models of C_0 for dimension 5

TensorModel tensor_model(const EvenClifford& C) {
  if (C.form.dim() != 5) throw precondition("tensor model needs a 5-dimensional form");
  Field f = C.form.field();
  const NormalForm nf = block_normalize(C.form);
  if (nf.blocks.size() != 2 || nf.diagonal.size() != 1) throw std::logic_error("unexpected normal form");
  const Matrix& T = nf.witness.T;
  const QuadraticForm& q = C.form;
  const Vec fvec = T.column(4);
  const Value dval = q(fvec);
  const Straightener st(q);
  std::vector<Quat> Qs;
  std::vector<std::vector<Vec>> bases;
  for (size_t k = 0; k < 2; ++k) {
    Vec g1 = T.column(2 * k), g2 = T.column(2 * k + 1);
    if (q(g1).is_zero()) {
      if (!q(g2).is_zero()) std::swap(g1, g2);
      else g1 = add(g1, g2);
    }
    if (q.polar(g1, g2) != Value::one(f)) throw std::logic_error("block is not normalized");
    // U = g1 g2, V = f g1: U^2 = U + q(g1) q(g2), V^2 = d q(g1)
    const Vec U = vector_product(C, st, g1, g2);
    const Vec Vv = vector_product(C, st, fvec, g1);
    Qs.push_back(QuaternionAlgebra::make(q(g1) * q(g2), dval * q(g1)));
    bases.push_back({C.algebra->one(), U, Vv, C.algebra->mul(U, Vv)});
  }
  TensorModel tm;
  tm.Q1 = Qs[0];
  tm.Q2 = Qs[1];
  tm.model = AlgebraExpression::tensor(AlgebraExpression::quat(tm.Q1), AlgebraExpression::quat(tm.Q2));
  std::vector<Vec> cols;
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) cols.push_back(C.algebra->mul(bases[0][i], bases[1][j]));
  tm.map = AlgebraMap{materialize(tm.model), C.algebra, Matrix::from_columns(f, 16, cols)};
  if (!tm.map.verify()) throw std::logic_error("tensor model of C_0 does not verify");
  return tm;
}

Verdict<M2Presentation> m2_presentation(const Alg& A, int height) {
  using V = Verdict<M2Presentation>;
  if (A->degree() != 4 || involution_type(*A) != InvolutionType::symplectic)
    throw precondition("expected a degree-4 algebra with symplectic involution");
  Field f = A->field();
  const PfaffianData P = pfaffian(A);
  const auto iso = isotropic_vector(P.nrp, height);
  if (iso.is_no()) {
    V v = V::no(iso.cert, "division algebra: Albert form anisotropic");
    v.anisotropy = iso.anisotropy;
    return v;
  }
  if (!iso.is_yes()) return V::unknown(height, "Albert form isotropy not settled");

  // an isotropic s with Trp(s) != 0 gives the symmetric idempotent s / Trp(s)
  const Vec& v0 = *iso.witness;
  std::vector<Vec> cands{v0};
  for (size_t k = 0; k < v0.size(); ++k) {
    const Vec ek = unit_vec(f, v0.size(), k);
    const Value c = P.nrp.polar(v0, ek);
    if (!c.is_zero()) cands.push_back(add(ek, scale(v0, P.nrp(ek) / c)));
  }
  std::optional<Vec> s;
  for (const Vec& c : cands) {
    if (!P.nrp(c).is_zero()) throw std::logic_error("candidate is not isotropic for Nrp");
    if (P.trp.empty() || dot(P.trp, c).is_zero()) continue;
    s = c;
    break;
  }
  if (!s) return V::unknown(height, "no isotropic vector of Nrp with nonzero Trp");
  Vec elem = A->zero();
  for (size_t i = 0; i < s->size(); ++i) elem = add(elem, scale(P.symd_basis[i], (*s)[i]));
  const Vec e1 = scale(elem, dot(P.trp, *s).inv());
  const Vec e2 = add(A->one(), e1);
  if (A->mul(e1, e1) != e1 || A->sigma(e1) != e1) throw std::logic_error("symmetric idempotent check failed");

  auto corner = [&](const Vec& l, const Vec& r) {
    std::vector<Vec> vs;
    for (size_t i = 0; i < A->dim(); ++i) vs.push_back(A->mul(A->mul(l, A->basis(i)), r));
    return independent_subset(f, A->dim(), vs);
  };
  const auto C11 = corner(e1, e1), C21 = corner(e2, e1);
  if (C11.size() != 4 || C21.size() != 4) throw std::logic_error("idempotent of the wrong rank");

  // sigma(g) g = nu e1, h = sigma(g) / nu
  std::optional<Vec> g, h;
  for (const Vec& cand : with_pair_sums(C21)) {
    const auto nu = multiple_of(A->mul(A->sigma(cand), cand), e1);
    if (!nu || nu->is_zero()) continue;
    g = cand;
    h = scale(A->sigma(cand), nu->inv());
    break;
  }
  if (!g) return V::unknown(height, "no matrix units found");
  if (A->mul(*h, *g) != e1 || A->mul(*g, *h) != e2) throw std::logic_error("matrix units check failed");

  // quaternion basis of e1 A e1
  std::optional<Vec> u;
  Value r;
  for (const Vec& x : with_pair_sums(C11)) {
    if (multiple_of(x, e1)) continue;
    const auto ts = solve(Matrix::from_columns(f, A->dim(), {x, e1}), A->mul(x, x));
    if (!ts || (*ts)[0].is_zero()) continue;
    const Value t = (*ts)[0];
    u = scale(x, t.inv());
    r = (*ts)[1] / t.square();
    break;
  }
  if (!u) throw std::logic_error("no quaternion generator u in e1 A e1");
  std::vector<Vec> lin;
  for (const Vec& b : C11) lin.push_back(add(add(A->mul(*u, b), A->mul(b, *u)), b));
  const auto ker = kernel(Matrix::from_columns(f, A->dim(), lin));
  std::vector<Vec> vs;
  for (const Vec& k : ker) {
    Vec y = A->zero();
    for (size_t i = 0; i < k.size(); ++i) y = add(y, scale(C11[i], k[i]));
    vs.push_back(y);
  }
  std::optional<Vec> v;
  Value sv;
  for (const Vec& y : with_pair_sums(vs)) {
    const auto c = multiple_of(A->mul(y, y), e1);
    if (!c || c->is_zero()) continue;
    v = y;
    sv = *c;
    break;
  }
  if (!v) throw std::logic_error("no quaternion generator v in e1 A e1");

  M2Presentation out;
  out.Qp = QuaternionAlgebra::make(r, sv);
  out.base = AlgebraExpression::tensor(AlgebraExpression::adjoint(BilinearForm::diagonal(f, {Value::one(f), Value::one(f)})),
                                       AlgebraExpression::quat(out.Qp));
  const Alg B = materialize(out.base);
  auto hat = [&](const Vec& c) { return add(c, A->mul(A->mul(*g, c), *h)); };
  const std::vector<Vec> quat_img{A->one(), hat(*u), hat(*v), hat(A->mul(*u, *v))};
  const std::vector<Vec> units{e1, *h, *g, e2};
  std::vector<Vec> cols;
  for (size_t i = 0; i < 4; ++i)
    for (size_t k = 0; k < 4; ++k) cols.push_back(A->mul(units[i], quat_img[k]));
  const Matrix M = Matrix::from_columns(f, A->dim(), cols);
  const auto Mi = inverse(M);
  if (!Mi) throw std::logic_error("presentation map is singular");

  // x gamma(y) = sigma'(y) x on the basis
  const size_t n = B->dim();
  Matrix S(f, n * n, n);
  for (size_t i = 0; i < n; ++i) {
    const Vec y = B->basis(i);
    const Vec sy = Mi->apply(A->sigma(M.apply(y)));
    const Matrix R = right_matrix(*B, B->sigma(y)) + B->left_matrix(sy);
    for (size_t a = 0; a < n; ++a)
      for (size_t b = 0; b < n; ++b) S(i * n + a, b) = R(a, b);
  }
  const auto xs = kernel(S);
  if (xs.empty()) throw std::logic_error("no twist element for the presentation");
  out.x = xs.front();
  const Deg4Symplectic d(out.base, out.x);
  out.map = AlgebraMap{d.algebra(), A, M};
  if (!out.map.verify()) throw std::logic_error("M2(Q') presentation does not verify");
  return V::yes(out, "C_0 = M2(Q')");
}

// ---- Q from a domination

Verdict<QFromDomination> embed_Q_from_domination(const EvenClifford& C, const Value& a, const Value& b, int height) {
  using V = Verdict<QFromDomination>;
  Field f = C.form.field();
  if (a.field() != f || b.field() != f) throw Error(Error::Kind::field_mismatch, "slots over another field");
  if (b.is_zero()) throw precondition("b must be nonzero");
  const QuadraticForm conic = QuadraticForm::block(Value::one(f), a).orth(QuadraticForm::diagonal(f, {b}));
  const auto cands = ratio_candidates(C.form, conic, height, f->is_finite() ? 256 : 12);
  const Straightener st(C.form);
  bool all_no = true;
  for (const Value& c : cands) {
    const auto dom = dominates(C.form, conic.scaled(c), height);
    if (!dom.is_no()) all_no = false;
    if (!dom.is_yes()) continue;
    const Matrix& E = *dom.witness;
    const Vec f1 = E.column(0), f2 = E.column(1), f3 = E.column(2);
    QFromDomination out{c, E, {}};
    out.pair.p = scale(vector_product(C, st, f1, f2), c.inv());
    out.pair.q = scale(vector_product(C, st, f1, f3), c.inv());
    if (!check_quaternion_pair(*C.algebra, a, b, out.pair)) throw std::logic_error("pair from domination does not verify");
    return V::yes(out, "dominates " + to_string(c) + " * ([1,a] + <b>)");
  }
  // over a finite field every scalar was tried
  if (f->is_finite() && all_no && cands.size() + 1 >= f->size_finite())
    return V::no(Cert::finite_field_exhaustion, "no scaled copy of [1,a] + <b> is dominated");
  return V::unknown(height, "no domination found");
}

// ---- recovering the form

RecoveredForm recover_form(const EvenClifford& C) {
  if (C.form.dim() != 5) throw precondition("recover_form needs a 5-dimensional form");
  Field f = C.form.field();
  const PfaffianData P = pfaffian(C.algebra);
  const auto ker = kernel(Matrix::from_rows(f, {P.trp}));
  if (ker.size() != 5) throw std::logic_error("Symd^0 does not have dimension 5");
  RecoveredForm out;
  out.form = P.nrp.transform(Matrix::from_columns(f, P.trp.size(), ker));
  for (const Vec& k : ker) {
    Vec y = C.algebra->zero();
    for (size_t i = 0; i < k.size(); ++i) y = add(y, scale(P.symd_basis[i], k[i]));
    out.basis.push_back(y);
  }
  return out;
}

Verdict<Similarity> similar(const QuadraticForm& q1, const QuadraticForm& q2, int height) {
  using V = Verdict<Similarity>;
  Field f = q1.field();
  if (q2.field() != f) throw Error(Error::Kind::field_mismatch, "forms over different fields");
  if (q1.dim() != q2.dim()) return V::no(Cert::dimension, "dimensions differ");
  // over a finite field every scalar is a square, so similarity is isometry
  const auto cands = f->is_finite() ? std::vector<Value>{Value::one(f)} : ratio_candidates(q2, q1, height, 24);
  for (const Value& c : cands) {
    const auto iso = is_isometric(q1.scaled(c), q2, height);
    if (iso.is_yes()) return V::yes(Similarity{c, *iso.witness}, "factor " + to_string(c));
    if (f->is_finite() && iso.is_no()) return V::no(iso.cert, "not isometric over a finite field");
  }
  return V::unknown(height, "no similarity factor found");
}

// ---- F_Q-minimality of 5-dimensional forms

Verdict<Minimal5Report> fq_minimal_5(const QuadraticForm& rho, const Quat& Q, int height) {
  using V = Verdict<Minimal5Report>;
  Field f = rho.field();
  if (Q->field() != f) throw Error(Error::Kind::field_mismatch, "Q over another field");
  if (rho.dim() != 5) throw precondition("expected a 5-dimensional form");
  const Analysis an = analyze(rho);
  if (an.classification == Classification::degenerate || an.radical_dim != 1) throw precondition("form is degenerate");
  if (is_division(Q, height).kind != VerdictKind::yes) throw precondition("Q is not certified division");

  Minimal5Report rep;
  auto not_minimal = [&](Cert c, const std::string& why) {
    rep.decided_by = why;
    V v = V::no(c, "not minimal: " + why);
    v.witness = rep;
    return v;
  };
  auto unsettled = [&](const std::string& why) {
    rep.decided_by = why;
    V v = V::unknown(height, why);
    v.witness = rep;
    return v;
  };

  const auto iso = isotropic_vector(rho, height);
  rep.isotropic_over_F = iso.kind;
  rep.isotropic_over_F_detail = iso.is_no() ? "anisotropic (" + to_string(iso.cert) + ")" : iso.detail;
  if (iso.is_yes()) {
    rep.isotropic_vector = *iso.witness;
    rep.isotropic_over_FQ = VerdictKind::yes;
    return not_minimal(Cert::structural, "isotropic over F");
  }

  const EvenClifford C = even_clifford(rho);
  const auto dom = embed_Q_from_domination(C, Q->r(), Q->s(), height);
  rep.dominates_conic = dom.kind;
  rep.dominates_conic_detail = dom.detail;
  if (dom.is_yes()) {
    rep.conic = *dom.witness;
    rep.isotropic_over_FQ = VerdictKind::yes;
    rep.isotropic_over_FQ_detail = "dominates a form similar to the pure norm form of Q";
    return not_minimal(Cert::structural, "dominates a form similar to [1,a] + <b>");
  }

  // condition (b)
  const auto m2 = m2_presentation(C.algebra, height);
  if (m2.is_no()) {
    rep.coindex_two = VerdictKind::no;
    return not_minimal(m2.cert, "C_0 is a division algebra");
  }
  if (m2.is_unknown()) return unsettled("index of C_0 not settled: " + m2.detail);
  const M2Presentation& pres = *m2.witness;
  rep.Qp = pres.Qp;
  rep.coindex_two = is_division(pres.Qp, height).kind;
  const auto td = isotropic_vector(albert_form(Q, pres.Qp), height);
  rep.tensor_division = td.is_no() ? VerdictKind::yes : td.is_yes() ? VerdictKind::no : VerdictKind::unknown;
  if (td.is_yes()) return not_minimal(Cert::structural, "Q (x) Q' is not a division algebra");

  // hyperbolicity of (C_0, tau_0) over F_Q
  const Deg4Symplectic d(pres.base, pres.x);
  Verdict<Deg4Classification> cl;
  try {
    cl = hyperbolic_over_FQ_deg4(d, Q, height);
  } catch (const Error& e) {
    if (e.kind() != Error::Kind::precondition_failed) throw;
    // an isotropic canonical involution means rho is isotropic
    rep.isotropic_over_F = VerdictKind::yes;
    rep.isotropic_over_F_detail = e.what();
    rep.isotropic_over_FQ = VerdictKind::yes;
    return not_minimal(Cert::structural, "tau_0 is isotropic");
  }
  if (cl.witness) rep.classification = *cl.witness;
  if (cl.is_unknown()) return unsettled("hyperbolicity over F_Q not settled: " + cl.detail);
  if (cl.is_no()) {
    rep.isotropic_over_FQ = VerdictKind::no;
    rep.isotropic_over_FQ_detail = cl.detail;
    return not_minimal(cl.cert, "not isotropic over F_Q");
  }
  const Deg4Classification& k = *cl.witness;
  if (rep.isotropic_over_F == VerdictKind::unknown) {
    rep.isotropic_over_F = VerdictKind::no;
    rep.isotropic_over_F_detail = "tau_0 anisotropic: " + k.anisotropy;
  }
  rep.isotropic_over_FQ = VerdictKind::yes;
  rep.isotropic_over_FQ_detail = "(C_0, tau_0) hyperbolic over F_Q: " + to_string(k.tag);
  if (k.tag == Deg4Case::contains_Q) {
    rep.dominates_conic = VerdictKind::yes;
    return not_minimal(Cert::structural, "C_0 contains (Q, bar)");
  }
  rep.dominates_conic = VerdictKind::no;
  rep.dominates_conic_detail = "C_0 does not contain (Q, bar)";
  rep.lambda = k.lambda;

  // cross-check: rho similar to a subform of <<lambda>> n_Q
  if (k.lambda) {
    const QuadraticForm pi = pfister_times(*k.lambda, Q->norm_form());
    for (const Value& c : ratio_candidates(pi, rho, height, 8)) {
      const auto sub = dominates(pi, rho.scaled(c), height);
      if (sub.is_yes()) {
        rep.neighbour_check = VerdictKind::yes;
        break;
      }
    }
  }
  if (rep.tensor_division != VerdictKind::yes) return unsettled("Q (x) Q' division not settled");
  rep.decided_by = "anisotropic, hyperbolic over F_Q, no copy of (Q, bar)";
  return V::yes(rep, "minimal");
}

}  // namespace qfc2
