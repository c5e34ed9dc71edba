#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qfc2/pairs.hpp"

using namespace qfc2;

namespace {

Field F2() { return gf(1); }
Field F4() { return gf(2); }
Field F2t() { return rational(gf(1), "t"); }
Field F2st() { return rational(rational(gf(1), "s"), "t"); }
Value c(Field f, uint32_t b) { return Value::constant(f, b); }
Value var(Field f, const char* name) { return Value::variable(f, name); }

QuadraticForm blk(const Value& a, const Value& b) { return QuadraticForm::block(a, b); }
QuadraticForm hyp(Field f, size_t m) {
  QuadraticForm q = QuadraticForm::hyperbolic(f);
  for (size_t i = 1; i < m; ++i) q = q.orth(QuadraticForm::hyperbolic(f));
  return q;
}
Quat Qa(const Value& r, const Value& s) { return QuaternionAlgebra::make(r, s); }
Expr qexpr(const Quat& H) { return AlgebraExpression::quat(H); }

Vec flatten(const Matrix& M) {
  Vec out;
  for (size_t i = 0; i < M.rows(); ++i)
    for (size_t j = 0; j < M.cols(); ++j) out.push_back(M(i, j));
  return out;
}

// x x^T B in End(V)
Vec rank_one(const QuadraticForm& rho, const Vec& x) {
  const Matrix X = Matrix::from_columns(rho.field(), rho.dim(), {x});
  return flatten(X * X.transpose() * rho.polar_gram());
}

Vec kron(const Vec& a, const Vec& b) {
  Vec out;
  for (const Value& x : a)
    for (const Value& y : b) out.push_back(x * y);
  return out;
}

Vec random_vec(Field f, size_t n, std::mt19937_64& rng) { return oracle::random_invertible(f, n, 1, rng).column(0); }

// z^2 = a z + b for a central non-scalar z; the center is F[X]/(X^2 + X + b/a^2)
ArtinSchreierClass center_class(const QuadraticForm& rho) {
  const EvenClifford C = even_clifford(rho);
  const Algebra& A = *C.algebra;
  for (const Vec& z : center_basis(A)) {
    if (A.as_scalar(z)) continue;
    const auto ab = solve(Matrix::from_columns(A.field(), A.dim(), {z, A.one()}), A.mul(z, z));
    if (!ab || (*ab)[0].is_zero()) throw std::logic_error("center is not separable");
    const Value& a = (*ab)[0];
    return as_class((*ab)[1] * (a * a).inv());
  }
  throw std::logic_error("no central element");
}

}  // namespace

TEST(Pairs, AdjointDefiningProperty) {
  std::mt19937_64 rng(5);
  for (Field f : {F2(), F4(), F2t()})
    for (size_t n : {2, 4}) {
      const QuadraticForm rho = oracle::random_nonsingular(f, n, 1, rng);
      const QuadraticPair P = adjoint_pair(rho);
      EXPECT_TRUE(P.check_semitrace());
      EXPECT_EQ(P.kind(), QuadraticPair::Kind::adjoint);
      for (int k = 0; k < 20; ++k) {
        const Vec x = random_vec(f, n, rng);
        EXPECT_EQ(P.f(rank_one(rho, x)), rho(x));
      }
    }
}

TEST(Pairs, AdjointErrors) {
  Field f = F2t();
  EXPECT_THROW(
      {
        try {
          adjoint_pair(QuadraticForm::diagonal(f, {c(f, 1), var(f, "t")}));
        } catch (const Error& e) {
          EXPECT_EQ(e.kind(), Error::Kind::not_nonsingular);
          throw;
        }
      },
      Error);
}

TEST(Pairs, AdjointHyperbolicPlane) {
  for (Field f : {F2(), F2t()}) {
    const QuadraticPair P = adjoint_pair(QuadraticForm::hyperbolic(f));
    const auto h = pair_hyperbolic(P, 1);
    ASSERT_TRUE(h.is_yes());
    EXPECT_TRUE(check_pair_hyperbolic(P, *h.witness));
    EXPECT_TRUE(pair_discriminant(P).is_trivial());
  }
}

TEST(Pairs, SplitNormFormIsTwoHyperbolicPlanes) {
  Field f = F2t();
  const Quat H = Qa(var(f, "t"), c(f, 1));  // v^2 = 1 splits
  const auto iso = pair_isomorphic(adjoint_pair(H->norm_form()), adjoint_pair(hyp(f, 2)), 1);
  EXPECT_TRUE(iso.is_yes());
}

TEST(Pairs, IdentityValueForBlock) {
  // 1 = E11 + sigma(E11) with sigma(E11) = E22 for b = [[0,1],[1,0]], so f(1) = Trd(E11) = 1
  Field f = F2t();
  const Value t = var(f, "t");
  for (const Value& cc : {c(f, 0), c(f, 1), t, t * t + c(f, 1)}) {
    const QuadraticPair P = adjoint_pair(blk(c(f, 1), cc));
    EXPECT_EQ(P.f(P.algebra()->one()), c(f, 1));
  }
}

TEST(Pairs, AdFunctoriality) {
  std::mt19937_64 rng(9);
  Field f = F2t();
  const Value t = var(f, "t");
  for (const Value& lambda : {t, t + c(f, 1), t * t * t})
    for (const Value& cc : {c(f, 1), t}) {
      const QuadraticForm rho = blk(c(f, 1), cc);
      const BilinearForm b = BilinearForm::diagonal(f, {c(f, 1), lambda});
      const QuadraticPair T = tensor_pair(AlgebraExpression::adjoint(b), adjoint_pair(rho));
      EXPECT_EQ(T.kind(), QuadraticPair::Kind::tensor);
      EXPECT_TRUE(T.check_semitrace());
      const QuadraticForm target = rho.orth(rho.scaled(lambda));
      const auto iso = pair_isomorphic(T, adjoint_pair(target), 1);
      ASSERT_TRUE(iso.is_yes());
      EXPECT_TRUE((PairMap{T, adjoint_pair(target), *iso.witness}.verify()));
      // b (x) rho on pure tensors, up to the scalar fixed at e1 (x) e1
      const QuadraticForm q = adjoint_form(T);
      const Vec e1 = unit_vec(f, 2, 0);
      const Value mu = q(kron(e1, e1));
      for (int k = 0; k < 5; ++k) {
        const Vec x = random_vec(f, 2, rng), y = random_vec(f, 2, rng);
        EXPECT_EQ(q(kron(x, y)), mu * b(x, x) * rho(y));
      }
    }
  // random 2 x 2 instances over a finite field
  for (int k = 0; k < 10; ++k) {
    const QuadraticForm rho = oracle::random_nonsingular(F4(), 2, 1, rng);
    const Matrix G = oracle::random_invertible(F4(), 2, 1, rng);
    const BilinearForm b(G * G.transpose());
    const QuadraticPair T = tensor_pair(AlgebraExpression::adjoint(b), adjoint_pair(rho));
    const auto iso = pair_isomorphic(T, adjoint_pair(adjoint_form(T)), 1);
    EXPECT_TRUE(iso.is_yes());
  }
}

TEST(Pairs, SymplecticFactorKillsSplitTensors) {
  Field f = F2t();
  const Value t = var(f, "t");
  const Quat H = Qa(c(f, 1), t);
  const QuadraticPair P = adjoint_pair(blk(c(f, 1), t));
  const QuadraticPair T = tensor_pair(qexpr(H), P);
  EXPECT_EQ(T.kind(), QuadraticPair::Kind::boxtimes);
  const Alg B = materialize(qexpr(H));
  for (const Vec& b : B->sym_basis())
    for (const Vec& a : P.algebra()->sym_basis()) EXPECT_TRUE(T.f(kron(b, a)).is_zero());
}

TEST(Pairs, TensorWithBaseFieldIsUnchanged) {
  std::mt19937_64 rng(2);
  Field f = F2t();
  const QuadraticPair P = adjoint_pair(oracle::random_nonsingular(f, 4, 1, rng));
  const QuadraticPair T = tensor_pair(AlgebraExpression::base(f), P);
  for (const Vec& a : P.algebra()->sym_basis()) EXPECT_EQ(T.f(a), P.f(a));
  EXPECT_TRUE(pair_isomorphic(T, P, 1).is_yes());
}

TEST(Pairs, BoxtimesNeedsSymplectic) {
  Field f = F2t();
  const Expr orth = AlgebraExpression::adjoint(BilinearForm::diagonal(f, {c(f, 1), var(f, "t")}));
  try {
    boxtimes(orth, qexpr(Qa(c(f, 1), var(f, "t"))));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), Error::Kind::precondition_failed);
  }
}

TEST(Pairs, QuaternionBoxSelfIsNormForm) {
  std::mt19937_64 rng(4);
  Field f = F2st();
  const Value s = var(f, "s"), t = var(f, "t");
  const Quat Q = Qa(s, t);
  // Trd(conj(x) u x) = Nrd(x) for Trd(u) = 1
  const Quaternion u = Q->u();
  ASSERT_EQ(Q->trd(u), c(f, 1));
  std::vector<Quaternion> xs;
  for (size_t i = 0; i < 4; ++i) xs.push_back(Q->basis(i));
  for (int k = 0; k < 100; ++k) xs.push_back(random_quaternion(Q, 2, rng));
  for (const Quaternion& x : xs) EXPECT_EQ(Q->trd(Q->mul(Q->mul(Q->conj(x), u), x)), Q->nrd(x));

  const QuadraticPair P = boxtimes(qexpr(Q), qexpr(Q));
  EXPECT_TRUE(P.check_semitrace());
  // the adjoint form is defined up to a scalar
  const QuadraticForm rho = adjoint_form(P);
  const Value lambda = rho(Q->one().x);
  ASSERT_FALSE(lambda.is_zero());
  for (const Quaternion& x : xs) EXPECT_EQ(rho(x.x), lambda * Q->nrd(x));
  const auto iso = pair_isomorphic(P, adjoint_pair(Q->norm_form()), 2);
  ASSERT_TRUE(iso.is_yes());
}

TEST(Pairs, BoxtimesCommutes) {
  Field f = F2st();
  const Value s = var(f, "s"), t = var(f, "t");
  const Expr L = qexpr(Qa(c(f, 1), s)), R = qexpr(Qa(s, t));
  const QuadraticPair LR = boxtimes(L, R), RL = boxtimes(R, L);
  const auto iso = pair_isomorphic(LR, RL, 1);
  ASSERT_TRUE(iso.is_yes());
  EXPECT_TRUE((PairMap{LR, RL, *iso.witness}.verify()));
}

TEST(Pairs, BoxtimesIgnoresRightSemitrace) {
  Field f = F2t();
  const Value t = var(f, "t");
  const Expr Ql = qexpr(Qa(c(f, 1), t)), Qr = qexpr(Qa(t, t + c(f, 1)));
  const Alg R = materialize(Qr);
  ASSERT_EQ(R->sym_basis().size(), 3u);
  // g(1) = Trd(u) = 1 is forced; g(v) is free
  const QuadraticPair g1 = QuadraticPair::make(Qr, {c(f, 1), c(f, 0), c(f, 0)});
  const QuadraticPair g2 = QuadraticPair::make(Qr, {c(f, 1), c(f, 1), c(f, 0)});
  EXPECT_NE(g1.values(), g2.values());
  const QuadraticPair box = boxtimes(Ql, Qr);
  for (const QuadraticPair& g : {g1, g2}) {
    const QuadraticPair T = tensor_pair(Ql, g);
    EXPECT_TRUE(pair_isomorphic(T, box, 1).is_yes());
  }
  EXPECT_THROW(QuadraticPair::make(Qr, {c(f, 0), c(f, 0), c(f, 0)}), Error);
}

TEST(Pairs, DiscriminantIsArf) {
  std::mt19937_64 rng(21);
  int count = 0;
  for (Field f : {F2(), F4(), F2t()})
    for (size_t n : {2, 4})
      for (int k = 0; k < 34; ++k, ++count) {
        const QuadraticForm rho = oracle::random_nonsingular(f, n, 1, rng);
        const ArtinSchreierClass d = pair_discriminant(adjoint_pair(rho));
        EXPECT_EQ(d, arf(rho));
        if (f->is_finite()) EXPECT_EQ(d.is_trivial(), oracle::arf_by_count(rho) == 0);
      }
  EXPECT_GE(count, 200);
}

TEST(Pairs, DiscriminantOfTwoBlocks) {
  Field f = F2t();
  const Value t = var(f, "t");
  for (const auto& [a, b] : std::vector<std::pair<Value, Value>>{{c(f, 1), t}, {t, t * t + t + c(f, 1)}, {t, t}}) {
    const QuadraticForm rho = blk(c(f, 1), a).orth(blk(c(f, 1), b));
    const ArtinSchreierClass d = pair_discriminant(adjoint_pair(rho));
    EXPECT_EQ(d, as_class(a + b));
    EXPECT_EQ(d, center_class(rho));
  }
  // through a tensor presentation: <1,l> (x) [1,c] has trivial discriminant
  const QuadraticPair T =
      tensor_pair(AlgebraExpression::adjoint(BilinearForm::diagonal(f, {c(f, 1), t})), adjoint_pair(blk(c(f, 1), t)));
  EXPECT_TRUE(pair_discriminant(T).is_trivial());
}

TEST(Pairs, BoxtimesDiscriminantTrivial) {
  Field f = F2st();
  const Value s = var(f, "s"), t = var(f, "t");
  EXPECT_TRUE(pair_discriminant(boxtimes(qexpr(Qa(c(f, 1), s)), qexpr(Qa(s, t)))).is_trivial());
  // an unsupported presentation
  const QuadraticPair g = QuadraticPair::make(qexpr(Qa(c(f, 1), s)), {c(f, 1), c(f, 0), c(f, 0)});
  const Expr orth = AlgebraExpression::adjoint(BilinearForm::diagonal(f, {c(f, 1), s, t}));
  try {
    pair_discriminant(tensor_pair(orth, tensor_pair(qexpr(Qa(c(f, 1), t)), g)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), Error::Kind::unsupported);
  }
}

TEST(Pairs, SplitOverFQ) {
  Field f = F2t();
  const Value t = var(f, "t");
  const Quat Q = Qa(c(f, 1), t);
  ASSERT_EQ(is_division(Q, 2).kind, VerdictKind::yes);
  const QuadraticForm nQ = Q->norm_form();

  // degree 12 is past the materialization cap, so the form-level entry is used
  EXPECT_THROW(adjoint_pair(nQ.orth(hyp(f, 4))), Error);
  const auto four = adjoint_over_FQ(nQ.orth(hyp(f, 4)), Q, 2);
  ASSERT_TRUE(four.is_yes());
  EXPECT_EQ(four.witness->shape, PairShape::split);
  EXPECT_EQ(four.witness->witt_index, 4u);
  EXPECT_EQ(four.witness->contains_Q, VerdictKind::yes);

  const auto one = pair_over_FQ(adjoint_pair(nQ.orth(hyp(f, 1))), Q, 2);
  ASSERT_TRUE(one.is_yes());
  EXPECT_EQ(one.witness->witt_index, 1u);
  EXPECT_EQ(one.witness->contains_Q, VerdictKind::no);

  const auto hyperbolic = pair_over_FQ(adjoint_pair(hyp(f, 4)), Q, 2);
  ASSERT_TRUE(hyperbolic.is_yes());
  EXPECT_TRUE(hyperbolic.witness->hyperbolic_over_F);
  ASSERT_TRUE(hyperbolic.witness->idempotent);
  EXPECT_TRUE(check_pair_hyperbolic(adjoint_pair(hyp(f, 4)), *hyperbolic.witness->idempotent));
  EXPECT_EQ(hyperbolic.witness->contains_Q, VerdictKind::yes);
}

TEST(Pairs, DegreeFourNontrivialDiscriminant) {
  Field f = F2st();
  const Value s = var(f, "s"), t = var(f, "t");
  const Quat Q = Qa(c(f, 1), t);
  const QuadraticForm rho = blk(c(f, 1), c(f, 1)).orth(blk(c(f, 1), s).scaled(t));  // Arf 1 + s
  ASSERT_FALSE(arf(rho).is_trivial());
  ASSERT_TRUE(certify_anisotropic(rho).has_value());
  const auto v = pair_over_FQ(adjoint_pair(rho), Q, 2);
  EXPECT_TRUE(v.is_no());
}

TEST(Pairs, SplitContainsAtIndexZero) {
  Field f = F2st();
  const Value s = var(f, "s"), t = var(f, "t");
  const Quat Q = Qa(c(f, 1), t);
  const QuadraticForm rho = Q->norm_form().orth(Q->norm_form().scaled(s));
  ASSERT_TRUE(certify_anisotropic(rho).has_value());
  const auto v = pair_over_FQ(adjoint_pair(rho), Q, 2);
  ASSERT_TRUE(v.is_yes());
  EXPECT_EQ(v.witness->witt_index, 0u);
  EXPECT_EQ(v.witness->contains_Q, VerdictKind::yes);
  ASSERT_TRUE(v.witness->multiple);
  EXPECT_TRUE(v.witness->multiple->witness.verify());
}

TEST(Pairs, DegreeFourBoxtimesOverFQ) {
  Field f = F2st();
  const Value s = var(f, "s"), t = var(f, "t");
  const Quat Q = Qa(c(f, 1), t);
  const Quat H = Qa(c(f, 1), s);
  ASSERT_EQ(is_division(Q, 2).kind, VerdictKind::yes);
  ASSERT_EQ(is_division(H, 2).kind, VerdictKind::yes);

  const auto with_Q = pair_over_FQ(boxtimes(qexpr(H), qexpr(Q)), Q, 2);
  ASSERT_TRUE(with_Q.is_yes());
  EXPECT_EQ(with_Q.witness->shape, PairShape::degree4);
  EXPECT_EQ(with_Q.witness->contains_Q, VerdictKind::yes);
  ASSERT_TRUE(with_Q.witness->component_witness);
  EXPECT_TRUE(with_Q.witness->component_witness->verify());

  const auto split = pair_over_FQ(boxtimes(qexpr(Qa(c(f, 1), c(f, 1))), qexpr(H)), Q, 2);
  ASSERT_TRUE(split.is_yes());
  EXPECT_TRUE(split.witness->hyperbolic_over_F);

  // H and [1,st) ~ H (x) Q: neither component is Q and both stay division
  const auto neither = pair_over_FQ(boxtimes(qexpr(H), qexpr(Qa(c(f, 1), s * t))), Q, 2);
  EXPECT_TRUE(neither.is_no());
}

TEST(Pairs, BrauerQHyperbolic) {
  Field f = F2t();
  const Value t = var(f, "t");
  const Quat Q = Qa(c(f, 1), t);
  const QuadraticPair P = tensor_pair(qexpr(Q), adjoint_pair(hyp(f, 2)));
  const auto v = pair_over_FQ(P, Q, 2);
  ASSERT_TRUE(v.is_yes());
  EXPECT_EQ(v.witness->shape, PairShape::brauer_Q);
  EXPECT_EQ(v.witness->contains_Q, VerdictKind::yes);
  ASSERT_TRUE(v.witness->idempotent);
  EXPECT_TRUE(check_pair_hyperbolic(P, *v.witness->idempotent));
}
