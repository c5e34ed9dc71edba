#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qfc2/quaternions.hpp"

using namespace qfc2;

namespace {

Field F2() { return gf(1); }
Field F4() { return gf(2); }
Field F2t() { return rational(gf(1), "t"); }
Field F4t() { return rational(gf(2), "t"); }
Value c(Field f, uint32_t b) { return Value::constant(f, b); }

// 2x2 matrix model of [c^2+c, s): u -> diag(c, c+1), v -> [[0,s],[1,0]]
Matrix model(const Quaternion& x, const Value& cc, const Value& s) {
  Field f = cc.field();
  const Value one = Value::one(f), z = Value::zero(f);
  Matrix I = Matrix::identity(f, 2);
  Matrix U = Matrix::from_rows(f, {{cc, z}, {z, cc + one}});
  Matrix V = Matrix::from_rows(f, {{z, s}, {one, z}});
  Matrix W = U * V;
  return I.scaled(x.x[0]) + U.scaled(x.x[1]) + V.scaled(x.x[2]) + W.scaled(x.x[3]);
}

}  // namespace

TEST(Quaternion, TableExamples) {
  Field f = F2t();
  const Value r = Value::variable(f, "t"), s = r + c(f, 1);
  Quat H = QuaternionAlgebra::make(r, s);
  EXPECT_EQ(H->u() * H->v(), H->w());
  EXPECT_EQ(H->v() * H->u(), H->w() + H->v());
  EXPECT_EQ(H->u() * H->u(), H->u() + H->scalar(r));
  EXPECT_EQ(H->w() * H->w(), H->scalar(r * s));
  EXPECT_EQ(H->u() * H->w(), H->w() + H->v().scaled(r));
  EXPECT_EQ(H->w() * H->u(), H->v().scaled(r));
}

TEST(Quaternion, MatrixModelAgrees) {
  std::mt19937_64 rng(1);
  for (Field f : {F4(), F2t(), F4t()}) {
    for (int it = 0; it < 20; ++it) {
      const Value cc = random_value(f, 1, rng), s = random_nonzero(f, 1, rng);
      Quat H = QuaternionAlgebra::make(cc * cc + cc, s);
      for (int k = 0; k < 10; ++k) {
        Quaternion x = random_quaternion(H, 1, rng), y = random_quaternion(H, 1, rng);
        EXPECT_EQ(model(x * y, cc, s), model(x, cc, s) * model(y, cc, s));
        EXPECT_EQ(H->nrd(x), det(model(x, cc, s)));
      }
    }
  }
}

TEST(Quaternion, ConjugationExamplesAndLaws) {
  Field f = F2t();
  Quat H = QuaternionAlgebra::make(Value::variable(f, "t"), c(f, 1) + Value::variable(f, "t"));
  EXPECT_EQ(H->conj(H->u()), H->one() + H->u());
  EXPECT_EQ(H->conj(H->v()), H->v());
  EXPECT_EQ(H->conj(H->w()), H->w());
  EXPECT_TRUE(H->trd(H->w()).is_zero());
  EXPECT_TRUE(H->trd(H->u()).is_one());
  std::mt19937_64 rng(2);
  for (int it = 0; it < 200; ++it) {
    Quat G = QuaternionAlgebra::make(random_value(f, 1, rng), random_nonzero(f, 1, rng));
    Quaternion x = random_quaternion(G, 1, rng), y = random_quaternion(G, 1, rng);
    EXPECT_EQ(G->conj(G->conj(x)), x);
    EXPECT_EQ(G->conj(x * y), G->conj(y) * G->conj(x));
    EXPECT_EQ(G->nrd(x * y), G->nrd(x) * G->nrd(y));
    EXPECT_EQ(x + G->conj(x), G->scalar(G->trd(x)));
    EXPECT_EQ(x * G->conj(x), G->scalar(G->nrd(x)));
  }
}

TEST(Quaternion, NormForms) {
  Field f = F2t();
  const Value t = Value::variable(f, "t");
  Quat H = QuaternionAlgebra::make(c(f, 1), t);
  const QuadraticForm b = QuadraticForm::block(c(f, 1), c(f, 1));
  EXPECT_EQ(H->norm_form(), b.orth(b.scaled(t)));
  const Value a = t + c(f, 1);
  Quat G = QuaternionAlgebra::make(a, t);
  EXPECT_EQ(G->pure_norm_form(),
            QuadraticForm::diagonal(f, {c(f, 1)}).orth(QuadraticForm::block(c(f, 1), a).scaled(t)));
  // restriction of the norm form to (1, v, w)
  Matrix E = Matrix::from_columns(f, 4, {unit_vec(f, 4, 0), unit_vec(f, 4, 2), unit_vec(f, 4, 3)});
  EXPECT_TRUE(oracle::embedding_by_points(G->pure_norm_form(), G->norm_form(), E));
  Quat S = QuaternionAlgebra::make(Value::zero(F2()), c(F2(), 1));
  EXPECT_EQ(witt_decompose(S->norm_form(), 0).index, 2u);
}

TEST(Quaternion, DivisionExamples) {
  Field f = F2t();
  const Value t = Value::variable(f, "t");
  auto d = is_division(QuaternionAlgebra::make(c(f, 1), t), 4);
  EXPECT_EQ(d.kind, VerdictKind::yes);
  EXPECT_EQ(d.cert, Cert::degree_parity);
  ASSERT_TRUE(d.certificate);

  Field g = F4t();
  const Value tg = Value::variable(g, "t");
  Quat H = QuaternionAlgebra::make(c(g, 1), tg);
  auto s = is_division(H, 4);
  EXPECT_EQ(s.kind, VerdictKind::no);
  ASSERT_TRUE(s.idempotent);
  const Value om = c(g, 2);
  // w^2 + w = 1 has the root omega in GF(4)
  EXPECT_TRUE(*s.idempotent == H->u() + H->scalar(om) || *s.idempotent == H->u() + H->scalar(om + c(g, 1)));
  EXPECT_EQ(*s.idempotent * *s.idempotent, *s.idempotent);

  std::mt19937_64 rng(3);
  for (int it = 0; it < 50; ++it) {
    Quat Z = QuaternionAlgebra::make(Value::zero(f), random_nonzero(f, 2, rng));
    auto r = is_division(Z, 2);
    EXPECT_EQ(r.kind, VerdictKind::no);
    ASSERT_TRUE(r.zero_divisor);
    EXPECT_TRUE(Z->nrd(*r.zero_divisor).is_zero());
    EXPECT_FALSE(r.zero_divisor->is_zero());
  }
}

TEST(Quaternion, DivisionAgreesWithExhaustionOverGF2) {
  // over a finite field every quaternion algebra is split
  for (uint32_t r = 0; r < 2; ++r) {
    auto d = is_division(QuaternionAlgebra::make(c(F2(), r), c(F2(), 1)), 0);
    EXPECT_EQ(d.kind, VerdictKind::no);
    EXPECT_TRUE(oracle::brute_isotropic(QuaternionAlgebra::make(c(F2(), r), c(F2(), 1))->norm_form()));
  }
}

TEST(Quaternion, SplitByFQ) {
  Field f = F2t();
  const Value t = Value::variable(f, "t");
  Quat Q = QuaternionAlgebra::make(c(f, 1), t);
  auto a = split_by_FQ(Q, Q, 4);
  ASSERT_TRUE(a.is_yes());
  EXPECT_FALSE(a.witness->split);
  auto b = split_by_FQ(QuaternionAlgebra::make(Value::zero(f), c(f, 1)), Q, 4);
  ASSERT_TRUE(b.is_yes());
  EXPECT_TRUE(b.witness->split);
  EXPECT_THROW(split_by_FQ(Q, QuaternionAlgebra::make(Value::zero(f), c(f, 1)), 4), Error);

  Field g = rational(rational(gf(1), "s"), "t");
  const Value s = Value::variable(g, "s"), tt = Value::variable(g, "t");
  Quat Q2 = QuaternionAlgebra::make(s, tt);
  Quat H2 = QuaternionAlgebra::make(s, tt + c(g, 1));
  auto r = split_by_FQ(H2, Q2, 2);
  EXPECT_FALSE(r.is_yes());
}

TEST(Quaternion, BasisChanges) {
  Field f = F2t();
  const Value t = Value::variable(f, "t"), one = c(f, 1), z = Value::zero(f);
  Quat H = QuaternionAlgebra::make(t, t + one);
  auto id = change_basis(H, BasisChangeMode::shift_u, z, z);
  EXPECT_TRUE(id.verified);
  EXPECT_EQ(id.u, H->u());
  EXPECT_EQ(id.v, H->v());
  EXPECT_EQ(id.r, t);

  auto sh = change_basis(H, BasisChangeMode::shift_u, one, z);
  EXPECT_TRUE(sh.verified);
  EXPECT_EQ(sh.u, H->u() + H->v());
  // (u+v)(1+u+v) = r + s by the table
  EXPECT_EQ(sh.r, t + t + one);

  auto rv = change_basis(H, BasisChangeMode::rescale_v, z, one);
  EXPECT_TRUE(rv.verified);
  EXPECT_EQ(rv.v, H->w());
  EXPECT_EQ(rv.s, t * (t + one));

  auto mixed = change_basis(H, BasisChangeMode::shift_u, t, one);
  EXPECT_TRUE(mixed.verified);
  EXPECT_EQ(mixed.u, H->u() + H->v().scaled(t) + H->w());

  Field g = F2();
  Quat S = QuaternionAlgebra::make(Value::zero(g), c(g, 1));
  // (v + w)^2 = s + s + 0 = 0 over [0,1)
  EXPECT_THROW(change_basis(S, BasisChangeMode::rescale_v, c(g, 1), c(g, 1)), Error);
}
