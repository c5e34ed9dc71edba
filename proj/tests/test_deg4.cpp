#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qfc2/deg4.hpp"

using namespace qfc2;

namespace {

Field F4() { return gf(2); }
Field F2t() { return rational(gf(1), "t"); }
Field F2st() { return rational(rational(gf(1), "s"), "t"); }
Value c(Field f, uint32_t b) { return Value::constant(f, b); }
Value var(Field f, const char* name) { return Value::variable(f, name); }

Expr QQ(const Quat& Q, const Quat& Q2) {
  return AlgebraExpression::tensor(AlgebraExpression::quat(Q), AlgebraExpression::quat(Q2));
}

// coordinates in (Q, bar) (x) (Q', bar): index 4 i + j for e_i (x) e_j
Vec elem(Field f, std::initializer_list<std::pair<size_t, Value>> terms) {
  Vec x = zero_vec(f, 16);
  for (const auto& [k, v] : terms) x[k] += v;
  return x;
}

Quat random_quat(Field f, int h, std::mt19937_64& rng) {
  return QuaternionAlgebra::make(random_value(f, h, rng), random_nonzero(f, h, rng));
}

// [s,t) (x) [1,s) over GF(2)(s,t): Albert form [1,s+1] + t[1,s] + s[1,1]
std::pair<Quat, Quat> division_pair() {
  Field f = F2st();
  const Value s = var(f, "s"), t = var(f, "t");
  return {QuaternionAlgebra::make(s, t), QuaternionAlgebra::make(c(f, 1), s)};
}

}  // namespace

TEST(Deg4, PfaffianSpecialElements) {
  std::mt19937_64 rng(11);
  Field f = F2t();
  for (int it = 0; it < 5; ++it) {
    Quat Q = random_quat(f, 2, rng), Q2 = random_quat(f, 2, rng);
    const PfaffianData P = pfaffian(materialize(QQ(Q, Q2)));
    const Value a = Q->r(), b = Q->s(), a2 = Q2->r(), b2 = Q2->s();
    for (int k = 0; k < 5; ++k) {
      const Value al = random_value(f, 2, rng), be = random_value(f, 2, rng);
      const Vec x = elem(f, {{0, al}, {4, be}, {1, be}});
      EXPECT_EQ(P.nrp_of(x), al * al + al * be + (a + a2) * be * be);
      for (uint32_t e1 = 0; e1 < 2; ++e1)
        for (uint32_t e2 = 0; e2 < 2; ++e2) {
          const Vec y = elem(f, {{0, al}, {8, c(f, e1)}, {2, c(f, e2)}});
          EXPECT_EQ(P.nrp_of(y), al * al + c(f, e1) * b + c(f, e2) * b2);
        }
      // pure y' in Q': Nrp(1 (x) y') = n_Q'(y')
      const Value p0 = random_value(f, 2, rng), p2 = random_value(f, 2, rng), p3 = random_value(f, 2, rng);
      const Vec z = elem(f, {{0, p0}, {2, p2}, {3, p3}});
      EXPECT_EQ(P.nrp_of(z), Q2->nrd(Q2->element({p0, Value::zero(f), p2, p3})));
    }
  }
}

TEST(Deg4, PfaffianRelationAndNorm) {
  std::mt19937_64 rng(12);
  for (Field f : {F4(), F2t()}) {
    Quat Q = random_quat(f, 1, rng), Q2 = random_quat(f, 1, rng);
    Alg A = materialize(QQ(Q, Q2));
    const PfaffianData P = pfaffian(A);
    for (int k = 0; k < 200; ++k) {
      Vec coords(6);
      for (auto& v : coords) v = random_value(f, 1, rng);
      Vec s = zero_vec(f, 16);
      for (size_t i = 0; i < 6; ++i) s = add(s, scale(P.symd_basis[i], coords[i]));
      const Value n = P.nrp(coords), t = P.trp_of(s);
      EXPECT_TRUE(is_zero(add(add(A->mul(s, s), scale(s, t)), A->scalar(n))));
      if (k % 10 == 0) {
        Value n8 = n * n;
        n8 = n8 * n8;
        n8 = n8 * n8;
        EXPECT_EQ(det(A->left_matrix(s)), n8);
      }
    }
  }
}

TEST(Deg4, PfaffianOnOtherReferences) {
  Field f = F2t();
  Quat Q2 = QuaternionAlgebra::make(c(f, 1), var(f, "t"));
  Expr m2 = AlgebraExpression::tensor(AlgebraExpression::adjoint(BilinearForm::diagonal(f, {c(f, 1), c(f, 1)})),
                                      AlgebraExpression::quat(Q2));
  Alg A = materialize(m2);
  const PfaffianData P = pfaffian(A);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    Vec s = zero_vec(f, 16);
    for (const auto& e : P.symd_basis) s = add(s, scale(e, random_value(f, 1, rng)));
    EXPECT_TRUE(is_zero(add(add(A->mul(s, s), scale(s, P.trp_of(s))), A->scalar(P.nrp_of(s)))));
  }
  // orthogonal reference: no Pfaffian
  EXPECT_THROW(pfaffian(materialize(AlgebraExpression::adjoint(BilinearForm::diagonal(
                   f, {c(f, 1), var(f, "t"), c(f, 1), var(f, "t") + c(f, 1)})))),
               Error);
}

TEST(Deg4, NrpWittClass) {
  std::mt19937_64 rng(13);
  Field f = F2t();
  for (int it = 0; it < 3; ++it) {
    Quat Q = random_quat(f, 1, rng), Q2 = random_quat(f, 1, rng);
    const PfaffianData P = pfaffian(materialize(QQ(Q, Q2)));
    const auto W = witt_decompose(P.nrp.orth(Q->norm_form()).orth(Q2->norm_form()), 2);
    EXPECT_EQ(W.anisotropic_part.dim(), 0u);
    EXPECT_TRUE(W.witness.verify());
  }
}

TEST(Deg4, RelativeDiscriminantReference) {
  Field f = F2t();
  Quat Q = QuaternionAlgebra::make(c(f, 1), var(f, "t")), Q2 = QuaternionAlgebra::make(var(f, "t"), var(f, "t") + c(f, 1));
  Deg4Symplectic d(QQ(Q, Q2));
  const auto j = relative_discriminant(d, 2);
  ASSERT_TRUE(j.is_yes());
  EXPECT_TRUE(j.witness->hyperbolic);
  EXPECT_TRUE(conjugate_test(d, d, 2).is_yes());
}

TEST(Deg4, RelativeDiscriminantPureTwists) {
  std::mt19937_64 rng(14);
  for (Field f : {F4(), F2t()}) {
    int unknown = 0;
    for (int it = 0; it < 10; ++it) {
      Quat Q = random_quat(f, 1, rng), Q2 = random_quat(f, 1, rng);
      Vec y;
      Quaternion yq;
      do {
        y = elem(f, {{0, random_value(f, 1, rng)}, {2, random_value(f, 1, rng)}, {3, random_value(f, 1, rng)}});
        yq = Q2->element({y[0], Value::zero(f), y[2], y[3]});
      } while (Q2->nrd(yq).is_zero());
      Deg4Symplectic d(QQ(Q, Q2), y);
      const auto j = relative_discriminant(d, 2);
      if (!j.is_yes()) {
        ++unknown;
        continue;
      }
      const PfaffianData P = pfaffian(d.reference());
      const QuadraticForm direct = P.nrp.orth(P.nrp.scaled(Q2->nrd(yq)));
      const auto W = witt_decompose(direct, 2);
      if (j.witness->hyperbolic) {
        EXPECT_EQ(W.anisotropic_part.dim(), 0u);
      } else {
        const auto iso = is_isometric(W.anisotropic_part, j.witness->form.scaled(j.witness->scale), 2);
        ASSERT_TRUE(iso.is_yes());
        EXPECT_TRUE(oracle::isometry_by_points(iso.witness->source, iso.witness->target, iso.witness->T));
      }
      // scalar multiples of x give isometric discriminants
      const Value lam = random_nonzero(f, 1, rng);
      Deg4Symplectic d2(QQ(Q, Q2), scale(y, lam));
      EXPECT_TRUE(conjugate_test(d, d2, 2).is_yes());
    }
    if (f->is_finite()) EXPECT_EQ(unknown, 0);
    else EXPECT_LE(unknown, 1);
  }
}

TEST(Deg4, TwistPreconditions) {
  Field f = F2t();
  Quat Q = QuaternionAlgebra::make(c(f, 1), var(f, "t"));
  // u (x) 1 is not symmetric under bar (x) bar
  EXPECT_THROW(Deg4Symplectic(QQ(Q, Q), elem(f, {{4, c(f, 1)}})), Error);
  EXPECT_THROW(Deg4Symplectic(AlgebraExpression::quat(Q)), Error);
  // 1 (x) 1 + u (x) 1 + 1 (x) u = (u (x) 1 + 1 (x) u) + 1 has Nrp = 1 + 1 + 0 = 0 when a + a' = 0
  EXPECT_THROW(Deg4Symplectic(QQ(Q, Q), elem(f, {{0, c(f, 1)}, {4, c(f, 1)}, {1, c(f, 1)}})), Error);
}

TEST(Deg4, CaseAContainsQ) {
  const auto [Q, Q2] = division_pair();
  Field f = Q->field();
  // sigma = bar (x) Int(v') o bar
  Deg4Symplectic d(QQ(Q, Q2), elem(f, {{2, c(f, 1)}}));
  const auto v = hyperbolic_over_FQ_deg4(d, Q, 1);
  ASSERT_TRUE(v.is_yes()) << v.detail;
  EXPECT_EQ(v.witness->tag, Deg4Case::contains_Q);
  EXPECT_EQ(v.witness->algebra_division, VerdictKind::yes);
  ASSERT_TRUE(v.witness->pair.has_value());
  EXPECT_TRUE(check_quaternion_pair(*d.algebra(), Q->r(), Q->s(), *v.witness->pair));
}

TEST(Deg4, IsotropicInvolutionRejected) {
  Field f = F2t();
  Quat Q = QuaternionAlgebra::make(c(f, 1), var(f, "t"));
  // (Q, bar) (x) (Q, bar) is split and hyperbolic
  Deg4Symplectic d(QQ(Q, Q));
  EXPECT_THROW(hyperbolic_over_FQ_deg4(d, Q, 1), Error);
}

TEST(Deg4, CommonValue) {
  std::mt19937_64 rng(15);
  for (Field f : {F4(), F2t()}) {
    for (int it = 0; it < 5; ++it) {
      Quat Q = random_quat(f, 1, rng), Q2 = random_quat(f, 1, rng);
      const PfaffianData P = pfaffian(materialize(QQ(Q, Q2)));
      Vec x = zero_vec(f, 16);
      for (const auto& e : P.symd_basis) x = add(x, scale(e, random_value(f, 1, rng)));
      if (P.nrp_of(x).is_zero()) continue;
      const auto v = common_value(Q, Q2, x, 4);
      ASSERT_FALSE(v.is_no());
      if (f->is_finite()) ASSERT_TRUE(v.is_yes());
      if (!v.is_yes()) continue;
      const auto& cv = *v.witness;
      EXPECT_EQ(cv.mu, P.nrp_of(x));
      EXPECT_EQ(cv.mu * Q->nrd(cv.y), cv.c);
      EXPECT_EQ(Q2->nrd(cv.y2), cv.c);
      EXPECT_TRUE(Q2->trd(cv.y2).is_zero());
      EXPECT_FALSE(cv.c.is_zero());
    }
  }
  // x = alpha (1 (x) 1): mu is a square, common value found
  Field f = F2t();
  Quat Q = QuaternionAlgebra::make(c(f, 1), var(f, "t")), Q2 = QuaternionAlgebra::make(var(f, "t"), c(f, 1));
  EXPECT_TRUE(common_value(Q, Q2, elem(f, {{0, var(f, "t")}}), 2).is_yes());
  // x = 1 + v (x) 1: mu = 1 + b is represented by n_Q
  const auto v2 = common_value(Q, Q2, elem(f, {{0, c(f, 1)}, {8, c(f, 1)}}), 2);
  ASSERT_TRUE(v2.is_yes());
  EXPECT_EQ(v2.witness->mu, c(f, 1) + Q->s());
}

TEST(Deg4, AlbertForm) {
  const auto [Q, Q2] = division_pair();
  EXPECT_TRUE(isotropic_vector(albert_form(Q, Q2), 1).is_no());
  Field f = F2t();
  Quat H = QuaternionAlgebra::make(c(f, 1), var(f, "t"));
  EXPECT_TRUE(isotropic_vector(albert_form(H, H), 1).is_yes());
}

TEST(Deg4, CaseBAdLambda) {
  // sigma = Ad_<<s>> (x) (Q', bar) on M2(Q'), Q' = [1,t), Q = [1+s, ts) over GF(2)(s,t):
  // <<s>> n_Q = <<s, ts, 1+s]] = <<s, t, 1]] = <<s>> n_Q' and Q (x) Q' is division
  Field f = F2st();
  const Value s = var(f, "s"), t = var(f, "t"), one = c(f, 1);
  Quat Q2 = QuaternionAlgebra::make(one, t);
  Quat Q = QuaternionAlgebra::make(one + s, t * s);
  Expr base = AlgebraExpression::tensor(AlgebraExpression::adjoint(BilinearForm::diagonal(f, {one, one})),
                                        AlgebraExpression::quat(Q2));
  Vec x = zero_vec(f, 16);
  x[0] = s;   // E11 (x) 1
  x[12] = one;  // E22 (x) 1
  Deg4Symplectic d(base, x);

  const auto j = relative_discriminant(d, 1);
  ASSERT_TRUE(j.is_yes());
  EXPECT_FALSE(j.witness->hyperbolic);
  // j is the 3-fold Pfister <<s>> (x) n_Q'
  const auto jj = is_isometric(j.witness->form, Q2->norm_form().orth(Q2->norm_form().scaled(s)), 1);
  ASSERT_TRUE(jj.is_yes());
  EXPECT_TRUE(oracle::isometry_by_points(jj.witness->source, jj.witness->target, jj.witness->T));

  const auto v = hyperbolic_over_FQ_deg4(d, Q, 1);
  ASSERT_TRUE(v.is_yes()) << v.detail;
  const auto& r = *v.witness;
  EXPECT_EQ(r.tag, Deg4Case::ad_lambda);
  EXPECT_EQ(r.contains_Q, VerdictKind::no);
  EXPECT_EQ(r.tensor_division, VerdictKind::yes);
  ASSERT_TRUE(r.lambda && r.j_witness && r.slot_witness);
  EXPECT_TRUE(oracle::isometry_by_points(r.j_witness->source, r.j_witness->target, r.j_witness->T));
  EXPECT_TRUE(oracle::isometry_by_points(r.slot_witness->source, r.slot_witness->target, r.slot_witness->T));
  EXPECT_TRUE(check_anisotropy_certificate(albert_form(Q, Q2),
                                           *isotropic_vector(albert_form(Q, Q2), 1).anisotropy));
}

TEST(Deg4, NotHyperbolicOverFQ) {
  // same sigma, Q = [s, ts): <<s>> n_Q does not match j = <<s>> n_Q'
  Field f = F2st();
  const Value s = var(f, "s"), t = var(f, "t"), one = c(f, 1);
  Quat Q2 = QuaternionAlgebra::make(one, t);
  Quat Q = QuaternionAlgebra::make(s, t * s);
  Expr base = AlgebraExpression::tensor(AlgebraExpression::adjoint(BilinearForm::diagonal(f, {one, one})),
                                        AlgebraExpression::quat(Q2));
  Vec x = zero_vec(f, 16);
  x[0] = s;
  x[12] = one;
  const auto v = hyperbolic_over_FQ_deg4(Deg4Symplectic(base, x), Q, 1);
  ASSERT_TRUE(v.is_no()) << v.detail;
  EXPECT_EQ(v.witness->tag, Deg4Case::not_hyperbolic);
  // independent check: j + n_Q keeps an anisotropic part larger than 4
  const auto j = relative_discriminant(Deg4Symplectic(base, x), 1);
  ASSERT_TRUE(j.is_yes());
  const auto W = witt_decompose(j.witness->form.orth(Q->norm_form()), 1);
  ASSERT_TRUE(W.residual.anisotropy);
  EXPECT_TRUE(check_anisotropy_certificate(W.anisotropic_part, *W.residual.anisotropy));
  EXPECT_GT(W.anisotropic_part.dim(), 4u);
}
