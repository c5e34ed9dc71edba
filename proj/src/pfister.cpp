#include <set>

#include "internal.hpp"

namespace qfc2 {

namespace {

QuadraticForm slot_times(const Value& c, const QuadraticForm& pi) {
  return tensor(BilinearForm::pfister(pi.field(), {c}), pi);
}

bool is_hyperbolic(const QuadraticForm& q, int height) {
  if (q.dim() % 2) return false;
  return witt_decompose(q, height).index * 2 == q.dim();
}

}  // namespace

Verdict<CommonSlot> common_slot(const QuadraticForm& pi1, const QuadraticForm& pi2, const Value& c1, const Value& c2,
                                int height) {
  using V = Verdict<CommonSlot>;
  Field f = pi1.field();
  if (pi2.field() != f || c1.field() != f || c2.field() != f)
    throw Error(Error::Kind::field_mismatch, "common_slot over different fields");
  if (c1.is_zero() || c2.is_zero()) throw Error(Error::Kind::precondition_failed, "slots must be nonzero");
  const QuadraticForm L = slot_times(c1, pi1), R = slot_times(c2, pi2);
  auto pre = is_isometric(L, R, height);
  if (pre.is_no()) throw Error(Error::Kind::precondition_failed, "<<c1>>pi1 and <<c2>>pi2 are not isometric");
  if (pre.is_unknown()) return V::unknown(height, "precondition not settled: " + pre.detail);

  auto attempt = [&](const Value& d) -> std::optional<CommonSlot> {
    const QuadraticForm M1 = slot_times(d, pi1), M2 = slot_times(d, pi2);
    auto a = is_isometric(L, M1, height);
    if (!a.is_yes()) return std::nullopt;
    auto b = is_isometric(M1, M2, height);
    if (!b.is_yes()) return std::nullopt;
    auto c = is_isometric(R, M2, height);
    if (!c.is_yes()) return std::nullopt;
    return CommonSlot{d, *a.witness, *b.witness, *c.witness};
  };

  if (is_hyperbolic(L, height)) {
    if (auto r = attempt(Value::one(f))) return V::yes(*r);
  }
  if (pi1 == pi2 && c1 == c2) {
    const size_t n = L.dim();
    IsometryWitness id{L, L, Matrix::identity(f, n)};
    return V::yes(CommonSlot{c1, id, id, id});
  }
  // d represented by both c1 pi1 and c2 pi2: isotropic vectors of c1 pi1 (+) c2 pi2
  const QuadraticForm S1 = pi1.scaled(c1), S2 = pi2.scaled(c2);
  const QuadraticForm sum = S1.orth(S2);
  const size_t n1 = pi1.dim();
  std::set<std::string> tried;
  for (int round = 0; round < 16; ++round) {
    auto v = detail::search_isotropic(sum, height, [&](const Vec& x) {
      Vec a(x.begin(), x.begin() + static_cast<long>(n1));
      const Value d = S1(a);
      return !d.is_zero() && !tried.count(d.to_string());
    });
    if (!v) break;
    Vec a(v->begin(), v->begin() + static_cast<long>(n1));
    const Value d = S1(a);
    tried.insert(d.to_string());
    if (auto r = attempt(d)) return V::yes(*r);
  }
  return V::unknown(height, "no common slot found");
}

Verdict<NscTransfer> nsc_transfer(const Value& b1, const Value& b2, const Value& c1, const Value& c2, const Value& d,
                                  const Value& d1, int height) {
  using V = Verdict<NscTransfer>;
  Field f = d.field();
  for (const auto* x : {&b1, &b2, &c1, &c2, &d1})
    if (x->field() != f) throw Error(Error::Kind::field_mismatch, "nsc_transfer over different fields");
  if (d.is_zero()) throw Error(Error::Kind::precondition_failed, "d must be nonzero");
  const QuadraticForm Lq = QuadraticForm::block(b1, b2).orth(QuadraticForm::diagonal(f, {d}));
  const QuadraticForm Rq = QuadraticForm::block(c1, c2).orth(QuadraticForm::diagonal(f, {d}));
  const QuadraticForm target_d1 = QuadraticForm::block(b1, b2).orth(QuadraticForm::block(Value::one(f), d1).scaled(d));
  if (b1 == c1 && b2 == c2)
    return V::yes(NscTransfer{d1, IsometryWitness{target_d1, target_d1, Matrix::identity(f, 4)}});
  auto pre = is_isometric(Lq, Rq, height);
  if (pre.is_no()) throw Error(Error::Kind::precondition_failed, "[b1,b2] + <d> and [c1,c2] + <d> are not isometric");
  if (pre.is_unknown()) return V::unknown(height, "precondition not settled: " + pre.detail);
  const Matrix& phi = pre.witness->T;  // (e1,f1,g) -> (e2,f2,g')
  // phi maps the radical g to g' exactly, since squaring is injective
  // z in span(e2,f2) with b'(phi(x), z) = gamma_x d for x = e1, f1
  const Matrix B2 = QuadraticForm::block(c1, c2).polar_gram();
  Matrix A(f, 2, 2);
  Vec rhs(2);
  for (size_t i = 0; i < 2; ++i) {
    const Vec px = phi.column(i);
    const Vec row = B2.apply({px[0], px[1]});
    A(i, 0) = row[0];
    A(i, 1) = row[1];
    rhs[i] = px[2] * d;
  }
  auto z = solve(A, rhs);
  if (!z) throw std::logic_error("nsc_transfer: singular block");
  const QuadraticForm zq = QuadraticForm::block(c1, c2);
  const Value d2 = d1 + zq(*z) / d;
  Matrix T(f, 4, 4);
  for (size_t i = 0; i < 3; ++i)
    for (size_t r = 0; r < 3; ++r) T(r, i) = phi(r, i);
  T(0, 3) = (*z)[0];
  T(1, 3) = (*z)[1];
  T(3, 3) = Value::one(f);
  const QuadraticForm target = QuadraticForm::block(c1, c2).orth(QuadraticForm::block(Value::one(f), d2).scaled(d));
  IsometryWitness w{target_d1, target, T};
  if (!w.verify()) throw std::logic_error("nsc_transfer witness failed");
  return V::yes(NscTransfer{d2, w});
}

Verdict<HyperbolicOverFQ> hyperbolic_over_FQ(const QuadraticForm& q, const QuadraticForm& nQ, int height) {
  using V = Verdict<HyperbolicOverFQ>;
  Field f = q.field();
  if (nQ.field() != f) throw Error(Error::Kind::field_mismatch, "hyperbolic_over_FQ over different fields");
  if (nQ.dim() != 4) throw Error(Error::Kind::precondition_failed, "norm form must have dimension 4");
  if (q.dim() % 2) throw Error(Error::Kind::precondition_failed, "form must be even-dimensional");
  if (q.dim() == 0) {
    IsometryWitness w{q, q, Matrix(f, 0, 0)};
    return V::yes(HyperbolicOverFQ{BilinearForm(Matrix(f, 0, 0)), w});
  }
  auto iso = isotropic_vector(q, height);
  if (iso.is_yes()) throw Error(Error::Kind::precondition_failed, "form is isotropic");
  if (iso.is_unknown()) return V::unknown(height, "anisotropy of the input not settled");
  if (q.dim() % 4) return V::no(Cert::dimension, "dimension is not a multiple of 4");
  if (analyze(q).classification != Classification::nonsingular)
    return V::no(Cert::structural, "singular forms are not multiples of a norm form");
  if (!arf(q).is_trivial()) return V::no(Cert::invariant_separation, "nontrivial Arf invariant");
  auto niso = isotropic_vector(nQ, height);
  if (niso.is_yes()) return V::no(Cert::structural, "Q is split, so F_Q is purely transcendental");
  if (niso.is_unknown()) return V::unknown(height, "division of Q not settled");

  const std::vector<Value> scalars = enumerate(f, f->is_finite() ? 0 : std::min(height, 1));
  Matrix W = Matrix::identity(f, q.dim());
  std::vector<Vec> basis;
  Vec mult;
  while (W.cols() > 0) {
    const QuadraticForm qW = q.transform(W);
    std::optional<Matrix> E;
    Value lambda;
    for (const auto& s : scalars) {
      if (s.is_zero()) continue;
      auto r = represents(qW, s, height);
      if (!r.is_yes()) continue;
      auto dm = dominates(qW, nQ.scaled(s), height);
      if (dm.is_yes()) {
        E = *dm.witness;
        lambda = s;
        break;
      }
    }
    if (!E) return V::unknown(height, "no scaled norm form found in the remaining part");
    for (size_t j = 0; j < 4; ++j) basis.push_back(W.apply(E->column(j)));
    mult.push_back(lambda);
    const Matrix Bw = qW.polar_gram();
    std::vector<Vec> fun;
    for (size_t j = 0; j < 4; ++j) fun.push_back(Bw.apply(E->column(j)));
    W = detail::complement_of(W, fun);
  }
  const BilinearForm b = BilinearForm::diagonal(f, mult);
  const QuadraticForm target = tensor(b, nQ);
  IsometryWitness w = IsometryWitness{target, q, Matrix::from_columns(f, q.dim(), basis)}.inverse();
  if (!w.verify()) throw std::logic_error("hyperbolic_over_FQ witness failed");
  return V::yes(HyperbolicOverFQ{b, w});
}

}  // namespace qfc2
