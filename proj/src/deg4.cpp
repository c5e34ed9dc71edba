#include "qfc2/deg4.hpp"

#include <tuple>

namespace qfc2 {

namespace {

bool same_quat(const Quat& a, const Quat& b) { return a->r() == b->r() && a->s() == b->s(); }

Error precondition(const std::string& msg) { return Error(Error::Kind::precondition_failed, msg); }

QuadraticForm pfister_times(const Value& lambda, const QuadraticForm& q) { return q.orth(q.scaled(lambda)); }

}  // namespace

// ---- Deg4Symplectic

Deg4Symplectic::Deg4Symplectic(Expr base, Vec x) : base_(std::move(base)), x_(std::move(x)) {
  if (base_->degree() != 4) throw precondition("expected an algebra of degree 4");
  gamma_ = materialize(base_);
  if (involution_type(*gamma_) != InvolutionType::symplectic) throw precondition("reference involution is not symplectic");
  if (x_.size() != gamma_->dim()) throw precondition("twist element has the wrong size");
  const Matrix SI = gamma_->involution_matrix() + Matrix::identity(gamma_->field(), gamma_->dim());
  if (!solve(SI, x_)) throw precondition("twist element is not in Symd");
  if (!gamma_->inverse(x_)) throw precondition("NotInvertible: twist element is not invertible");
  sigma_ = gamma_->twisted(x_, base_->to_string() + " twisted");
}

Deg4Symplectic::Deg4Symplectic(Expr base) : Deg4Symplectic(base, materialize(base)->one()) {}

// ---- Pfaffian

Vec PfaffianData::coordinates(const Vec& s) const {
  auto c = solve(Matrix::from_columns(algebra->field(), algebra->dim(), symd_basis), s);
  if (!c) throw precondition("element is not in Symd");
  return *c;
}

PfaffianData pfaffian(const Alg& A) {
  if (A->degree() != 4) throw precondition("Pfaffian needs degree 4");
  if (involution_type(*A) != InvolutionType::symplectic) throw precondition("Pfaffian needs a symplectic involution");
  Field f = A->field();
  PfaffianData P;
  P.algebra = A;
  P.symd_basis = A->symd_basis();
  if (P.symd_basis.size() != 6 || P.symd_basis.front() != A->one())
    throw std::logic_error("unexpected Symd basis");
  const Vec one = A->one();
  // (Trp(s), Nrp(s)) from s^2 = Trp(s) s + Nrp(s)
  auto relation = [&](const Vec& s) -> std::pair<Value, Value> {
    const Vec s2 = A->mul(s, s);
    if (auto lam = A->as_scalar(s)) return {Value::zero(f), *lam * *lam};
    auto c = solve(Matrix::from_columns(f, A->dim(), {s, one}), s2);
    if (!c) throw precondition("SquareRootFailure: s^2 is not in span(1, s)");
    return {(*c)[0], (*c)[1]};
  };
  const size_t n = 6;
  P.trp = zero_vec(f, n);
  Vec diag(n);
  for (size_t i = 0; i < n; ++i) std::tie(P.trp[i], diag[i]) = relation(P.symd_basis[i]);
  Matrix M(f, n, n);
  for (size_t i = 0; i < n; ++i) {
    M(i, i) = diag[i];
    for (size_t j = i + 1; j < n; ++j) {
      const auto [t, nn] = relation(add(P.symd_basis[i], P.symd_basis[j]));
      if (t != P.trp[i] + P.trp[j]) throw precondition("SquareRootFailure: Trp is not linear");
      M(i, j) = nn + diag[i] + diag[j];
    }
  }
  P.nrp = QuadraticForm(M);
  if (P.nrp(unit_vec(f, n, 0)) != Value::one(f)) throw std::logic_error("Nrp(1) != 1");
  return P;
}

QuadraticForm albert_form(const Quat& Q, const Quat& Q2) {
  Field f = Q->field();
  const Value one = Value::one(f);
  return QuadraticForm::block(one, Q->r())
      .scaled(Q->s())
      .orth(QuadraticForm::block(one, Q2->r()).scaled(Q2->s()))
      .orth(QuadraticForm::block(one, Q->r() + Q2->r()));
}

// ---- relative discriminant

Pfister3 hyperbolic_pfister3(Field f) {
  Pfister3 p;
  p.c1 = Value::one(f);
  p.c2 = Value::one(f);
  p.c3 = Value::zero(f);
  p.form = QuadraticForm::pfister(f, {p.c1, p.c2}, p.c3);
  p.hyperbolic = true;
  p.scale = Value::one(f);
  return p;
}

namespace {

/// phi (8-dim) similar to <<c1,c2>>[1,c3]: returns (scale, slots, witness phi -> scale * pfister).
std::optional<std::tuple<Value, Value, Value, Value, IsometryWitness>> recognize_pfister3(const QuadraticForm& phi,
                                                                                         int height) {
  Field f = phi.field();
  const size_t n = phi.dim();
  std::optional<Vec> v;
  for (size_t i = 0; i < n && !v; ++i)
    if (!phi(unit_vec(f, n, i)).is_zero()) v = unit_vec(f, n, i);
  if (!v) return std::nullopt;
  const Value factor = phi(*v);
  const QuadraticForm psi = phi.scaled(factor.inv());
  std::optional<Vec> w;
  for (size_t k = 0; k < n && !w; ++k) {
    const Value b = psi.polar(*v, unit_vec(f, n, k));
    if (!b.is_zero()) w = scale(unit_vec(f, n, k), b.inv());
  }
  if (!w) return std::nullopt;
  const Value c3 = psi(*w);
  // orthogonal complement of span(v, w)
  Matrix rows(f, 2, n);
  for (size_t k = 0; k < n; ++k) {
    rows(0, k) = psi.polar(*v, unit_vec(f, n, k));
    rows(1, k) = psi.polar(*w, unit_vec(f, n, k));
  }
  const auto C = kernel(rows);
  std::vector<Value> values;
  auto push = [&](const Vec& z) {
    const Value val = psi(z);
    if (val.is_zero()) return;
    for (const auto& x : values)
      if (x == val) return;
    values.push_back(val);
  };
  for (size_t i = 0; i < C.size(); ++i) {
    push(C[i]);
    for (size_t j = i + 1; j < C.size(); ++j) push(add(C[i], C[j]));
  }
  constexpr size_t kAttempts = 48;
  size_t attempts = 0;
  for (const auto& c1 : values)
    for (const auto& c2 : values) {
      if (++attempts > kAttempts) return std::nullopt;
      const QuadraticForm pi = QuadraticForm::pfister(f, {c1, c2}, c3);
      const auto iso = is_isometric(phi, pi.scaled(factor), height);
      if (iso.is_yes()) return std::make_tuple(factor, c1, c2, c3, *iso.witness);
    }
  return std::nullopt;
}

}  // namespace

Verdict<Pfister3> relative_discriminant(const Deg4Symplectic& d, int height) {
  using V = Verdict<Pfister3>;
  const PfaffianData P = pfaffian(d.reference());
  const Value c = P.nrp_of(d.x());
  if (c.is_zero()) throw precondition("NotInvertible: Nrp(x) = 0");
  const QuadraticForm q = pfister_times(c, P.nrp);
  WittDecomposition W = witt_decompose(q, height);
  Field f = d.field();
  const size_t an = W.anisotropic_part.dim();
  if (an == 0) {
    Pfister3 j = hyperbolic_pfister3(f);
    j.source = q;
    j.decomposition = std::move(W);
    return V::yes(std::move(j), "hyperbolic");
  }
  if (an == 8) {
    if (auto r = recognize_pfister3(W.anisotropic_part, height)) {
      auto& [scale, c1, c2, c3, wit] = *r;
      Pfister3 j;
      j.c1 = c1;
      j.c2 = c2;
      j.c3 = c3;
      j.form = QuadraticForm::pfister(f, {c1, c2}, c3);
      j.hyperbolic = false;
      j.scale = scale;
      j.witness = wit.inverse();
      j.source = q;
      const bool certified = W.residual.is_no();
      j.decomposition = std::move(W);
      return V::yes(std::move(j), certified ? "anisotropic" : "recognized; anisotropy of the residual not certified");
    }
    return V::unknown(height, "8-dimensional anisotropic part not recognized as a Pfister multiple");
  }
  return V::unknown(height, "anisotropic part of dimension " + std::to_string(an) + " after Witt decomposition");
}

Verdict<IsometryWitness> conjugate_test(const Deg4Symplectic& d1, const Deg4Symplectic& d2, int height) {
  using V = Verdict<IsometryWitness>;
  if (d1.base() != d2.base() && d1.base()->to_string() != d2.base()->to_string())
    throw precondition("ReferenceMismatch: different reference algebras");
  const auto j1 = relative_discriminant(d1, height), j2 = relative_discriminant(d2, height);
  if (!j1.is_yes() || !j2.is_yes()) return V::unknown(height, "relative discriminant not determined");
  if (j1.witness->hyperbolic && j2.witness->hyperbolic) {
    const QuadraticForm& h = j1.witness->form;
    return V::yes(IsometryWitness{h, h, Matrix::identity(d1.field(), h.dim())}, "both hyperbolic");
  }
  return is_isometric(j1.witness->form, j2.witness->form, height);
}

// ---- classification over F_Q

std::string to_string(Deg4Case c) {
  switch (c) {
    case Deg4Case::contains_Q: return "contains_Q";
    case Deg4Case::ad_lambda: return "ad_lambda";
    case Deg4Case::not_hyperbolic: return "not_hyperbolic";
  }
  return "?";
}

namespace {

using K = AlgebraExpression::Kind;

/// Base M2(Q') written as Ad_b (x) (Q', bar), in either order.
struct AdjointShape {
  BilinearForm b;
  Quat Q2;
  bool adjoint_first = true;
};
std::optional<AdjointShape> adjoint_shape(const Expr& base) {
  if (base->kind() != K::tensor) return std::nullopt;
  const Expr& l = base->left();
  const Expr& r = base->right();
  if (l->kind() == K::adjoint_bilinear && l->degree() == 2 && r->kind() == K::quat)
    return AdjointShape{*l->bilinear(), r->quaternion(), true};
  if (r->kind() == K::adjoint_bilinear && r->degree() == 2 && l->kind() == K::quat)
    return AdjointShape{*r->bilinear(), l->quaternion(), false};
  return std::nullopt;
}

bool has_Q_factor(const Expr& base, const Quat& Q) {
  return base->kind() == K::tensor && base->left()->kind() == K::quat && base->right()->kind() == K::quat &&
         (same_quat(base->left()->quaternion(), Q) || same_quat(base->right()->quaternion(), Q));
}

/// The form b' with sigma = Ad_b' (x) bar, when x lies in M2(F) (x) 1.
std::optional<BilinearForm> twisted_bilinear(const AdjointShape& s, const Vec& x) {
  Field f = s.b.field();
  Matrix X(f, 2, 2);
  for (size_t i = 0; i < 4; ++i)
    for (size_t k = 0; k < 4; ++k) {
      const size_t idx = s.adjoint_first ? i * 4 + k : k * 4 + i;
      if (k == 0) X(i / 2, i % 2) = x[idx];
      else if (!x[idx].is_zero()) return std::nullopt;
    }
  auto Xi = inverse(X);
  if (!Xi) return std::nullopt;
  return BilinearForm(s.b.gram() * *Xi);
}

}  // namespace

Verdict<Deg4Classification> hyperbolic_over_FQ_deg4(const Deg4Symplectic& d, const Quat& Q, int height) {
  using V = Verdict<Deg4Classification>;
  Field f = d.field();
  if (Q->field() != f) throw Error(Error::Kind::field_mismatch, "Q over another field");
  const auto shape = adjoint_shape(d.base());
  const bool q_factor = has_Q_factor(d.base(), Q);
  // reference involution must be hyperbolic over F_Q
  bool reference_ok = q_factor;
  if (!reference_ok && shape) {
    Vec diag{shape->b.gram()(0, 0), shape->b.gram()(1, 1)};
    reference_ok = shape->b.is_alternating() || isotropic_vector(QuadraticForm::diagonal(f, diag), 0).is_yes();
  }
  if (!reference_ok)
    throw precondition("reference must be (Q', bar) (x) (Q, bar) or a hyperbolic involution on M2(Q')");

  Deg4Classification out;
  const PfaffianData P = pfaffian(d.reference());
  // anisotropy of sigma
  const auto albert = isotropic_vector(P.nrp, height);
  if (albert.is_no()) {
    out.algebra_division = VerdictKind::yes;
    out.anisotropy = "division algebra: Albert form anisotropic (" + to_string(albert.cert) + ")";
  } else if (albert.is_yes()) {
    out.algebra_division = VerdictKind::no;
  }
  if (out.anisotropy.empty() && shape) {
    if (auto b2 = twisted_bilinear(*shape, d.x())) {
      const QuadraticForm hq = tensor(*b2, shape->Q2->norm_form());
      const auto iso = isotropic_vector(hq, height);
      if (iso.is_yes()) throw precondition("involution is isotropic");
      if (iso.is_no()) out.anisotropy = "adjoint of an anisotropic hermitian form (" + to_string(iso.cert) + ")";
    }
  }
  if (out.anisotropy.empty()) {
    const auto iso = isotropy(*d.algebra(), height);
    if (iso.is_yes()) throw precondition("involution is isotropic");
    if (!iso.is_no()) return V::unknown(height, "anisotropy of sigma not settled");
    out.anisotropy = "no isotropic element (" + to_string(iso.cert) + ")";
  }

  if (shape) {
    const auto alb = isotropic_vector(albert_form(Q, shape->Q2), height);
    out.tensor_division = alb.is_no() ? VerdictKind::yes : alb.is_yes() ? VerdictKind::no : VerdictKind::unknown;
  }
  // M2(Q') contains Q only if Q (x) Q' is not division
  const bool excluded = out.tensor_division == VerdictKind::yes;

  // case (a): a sigma-stable copy of (Q, bar)
  const auto cq = excluded ? Verdict<QuaternionPair>::no(Cert::structural) : contains_Q_canonical(*d.algebra(), Q, height,
                                       out.algebra_division == VerdictKind::yes ? std::optional<size_t>(4) : std::nullopt);
  out.contains_Q = cq.kind;
  if (cq.is_yes()) {
    out.tag = Deg4Case::contains_Q;
    out.pair = *cq.witness;
    return V::yes(out, "contains (Q, bar)");
  }

  const auto jv = relative_discriminant(d, height);
  if (!jv.is_yes()) return V::unknown(height, "relative discriminant: " + jv.detail);
  out.j = *jv.witness;
  const QuadraticForm nQ = Q->norm_form();
  if (out.j->hyperbolic) {
    if (q_factor) {
      // sigma is conjugate to the reference, which contains (Q, bar)
      out.tag = Deg4Case::contains_Q;
      return V::yes(out, "conjugate to the reference involution");
    }
    return V::unknown(height, "hyperbolic discriminant on a hyperbolic reference contradicts anisotropy");
  }
  const QuadraticForm& j = out.j->form;
  auto try_lambda = [&](const Value& lam) {
    if (lam.is_zero()) return false;
    const auto iso = is_isometric(j, pfister_times(lam, nQ), height);
    if (!iso.is_yes()) return false;
    out.lambda = lam;
    out.j_witness = *iso.witness;
    return true;
  };
  bool found = false;
  auto refuted = [&](Cert cert, const std::string& why) {
    out.tag = Deg4Case::not_hyperbolic;
    auto v = V::no(cert, why);
    v.witness = out;
    return v;
  };
  const auto dom = dominates(j, nQ, height);
  if (dom.is_no()) return refuted(dom.cert, "n_Q is not a subform of j");
  if (!dom.is_yes()) {
    // n_Q inside j forces Witt index >= 4 on j + n_Q
    const auto W = witt_decompose(j.orth(nQ), height);
    if (W.anisotropic_part.dim() > 4 && W.residual.is_no())
      return refuted(W.residual.cert, "j + n_Q has a certified anisotropic part of dimension " +
                                          std::to_string(W.anisotropic_part.dim()));
  }
  if (dom.is_yes()) {
    // lambda among the values of the complement of n_Q in j
    const Matrix& E = *dom.witness;
    std::vector<Vec> fn;
    for (size_t c = 0; c < E.cols(); ++c) {
      Vec row(j.dim());
      for (size_t k = 0; k < j.dim(); ++k) row[k] = j.polar(E.column(c), unit_vec(f, j.dim(), k));
      fn.push_back(row);
    }
    const auto C = kernel(Matrix::from_rows(f, fn));
    for (size_t i = 0; i < C.size() && !found; ++i) found = try_lambda(j(C[i]));
    for (size_t i = 0; i < C.size() && !found; ++i)
      for (size_t k = i + 1; k < C.size() && !found; ++k) found = try_lambda(j(add(C[i], C[k])));
  }
  if (!found) {
    constexpr size_t kSweep = 12;
    size_t tried = 0;
    for (const auto& lam : enumerate(f, std::min(height, 1))) {
      if (lam.is_zero()) continue;
      if ((found = try_lambda(lam)) || ++tried == kSweep) break;
    }
  }
  if (!found) return V::unknown(height, "no lambda with j = <<lambda>> n_Q found");
  out.tag = Deg4Case::ad_lambda;
  if (shape) {
    const Quat& Q2 = shape->Q2;
    const auto slot = is_isometric(pfister_times(*out.lambda, nQ), pfister_times(*out.lambda, Q2->norm_form()), height);
    if (slot.is_yes()) out.slot_witness = *slot.witness;
  }
  return V::yes(out, "j = <<lambda>> (x) n_Q");
}

// ---- common values

Verdict<CommonValue> common_value(const Quat& Q, const Quat& Q2, const Vec& x, int height) {
  using V = Verdict<CommonValue>;
  Field f = Q->field();
  if (Q2->field() != f) throw Error(Error::Kind::field_mismatch, "quaternion algebras over different fields");
  Alg A = materialize(AlgebraExpression::tensor(AlgebraExpression::quat(Q), AlgebraExpression::quat(Q2)));
  if (is_zero(x)) throw precondition("x must be nonzero");
  const PfaffianData P = pfaffian(A);
  const Value mu = P.nrp_of(x);
  if (mu.is_zero()) throw precondition("Nrp(x) = 0");
  const QuadraticForm nQ = Q->norm_form(), n2 = Q2->norm_form(), pure = Q2->pure_norm_form();
  const WittDecomposition W = witt_decompose(pfister_times(mu, n2), height);
  if (W.anisotropic_part.dim() != 0) {
    if (W.residual.is_no()) throw precondition("<<Nrp(x)>> (x) n_Q' is not hyperbolic");
    return V::unknown(height, "hyperbolicity of <<Nrp(x)>> (x) n_Q' not settled");
  }
  const QuadraticForm left = nQ.scaled(mu);
  auto quat_of_pure = [&](const Vec& p) { return Q2->element({p[0], Value::zero(f), p[1], p[2]}); };
  auto finish = [&](const Vec& y, const Vec& p, const std::string& how) {
    CommonValue cv{left(y), Q->element(y), quat_of_pure(p), mu};
    if (cv.c.is_zero() || cv.c != pure(p) || mu * Q->nrd(cv.y) != cv.c || Q2->nrd(cv.y2) != cv.c || !Q2->trd(cv.y2).is_zero())
      throw std::logic_error("common value check failed");
    return V::yes(cv, how);
  };
  const Vec one3{Value::one(f), Value::zero(f), Value::zero(f)};
  for (int h = 0; h <= height; ++h) {
    if (auto y = represents(left, Value::one(f), h); y.is_yes()) return finish(*y.witness, one3, "value 1");
    if (auto p = represents(pure, mu, h); p.is_yes()) return finish(unit_vec(f, 4, 0), *p.witness, "value Nrp(x)");
    const QuadraticForm both = left.orth(pure);
    const auto iso = isotropic_vector(both, h);
    if (iso.is_yes()) {
      const Vec& z = *iso.witness;
      const Vec y(z.begin(), z.begin() + 4), p(z.begin() + 4, z.end());
      if (!left(y).is_zero()) return finish(y, p, "isotropic vector");
    }
  }
  return V::unknown(height, "no common value found within the search bound");
}

}  // namespace qfc2
