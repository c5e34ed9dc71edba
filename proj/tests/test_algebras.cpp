#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qfc2/algebras.hpp"

using namespace qfc2;

namespace {

Field F2() { return gf(1); }
Field F4() { return gf(2); }
Field F2t() { return rational(gf(1), "t"); }
Value c(Field f, uint32_t b) { return Value::constant(f, b); }
Value t(Field f) { return Value::variable(f, "t"); }

// [1,t) over GF(2)(t): division
Quat division_Q() {
  Field f = F2t();
  return QuaternionAlgebra::make(c(f, 1), t(f));
}

BilinearForm alt(Field f, size_t pairs) {
  BilinearForm b = BilinearForm::hyperbolic(f);
  for (size_t i = 1; i < pairs; ++i) b = b.orth(BilinearForm::hyperbolic(f));
  return b;
}

void check_laws(const Algebra& A, int samples, std::mt19937_64& rng) {
  const size_t n = A.dim();
  for (int k = 0; k < samples; ++k) {
    const Vec x = random_element(A, 1, rng), y = random_element(A, 1, rng);
    ASSERT_EQ(A.sigma(A.mul(x, y)), A.mul(A.sigma(y), A.sigma(x)));
  }
  for (size_t i = 0; i < n; ++i) EXPECT_EQ(A.sigma(A.sigma(A.basis(i))), A.basis(i));
  EXPECT_EQ(A.sym_basis().size() + A.symd_basis().size(), n);
  // Symd inside Sym
  for (const auto& s : A.symd_basis()) EXPECT_EQ(A.sigma(s), s);
}

// n x n matrices over GF(2) as 0/1 row-major vectors
Matrix as_matrix(Field f, const Vec& x, size_t n) {
  Matrix M(f, n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) M(i, j) = x[i * n + j];
  return M;
}

}  // namespace

TEST(Algebra, QuaternionTableMatchesQuaternionModule) {
  Quat Q = division_Q();
  Alg A = materialize(AlgebraExpression::quat(Q));
  ASSERT_EQ(A->dim(), 4u);
  EXPECT_TRUE(is_associative(*A));
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(A->mul(A->basis(i), A->basis(j)), (Q->basis(i) * Q->basis(j)).x);
      EXPECT_EQ(A->sigma(A->basis(i)), Q->conj(Q->basis(i)).x);
    }
}

TEST(Algebra, TensorOfQuaternionsDimensions) {
  Field f = F2t();
  Quat Q = division_Q(), Q2 = QuaternionAlgebra::make(t(f), t(f) + c(f, 1));
  Alg A = materialize(AlgebraExpression::tensor(AlgebraExpression::quat(Q), AlgebraExpression::quat(Q2)));
  EXPECT_EQ(A->dim(), 16u);
  EXPECT_EQ(A->degree(), 4u);
  EXPECT_EQ(A->symd_basis().size(), 6u);
  EXPECT_EQ(A->sym_basis().size(), 10u);
  EXPECT_TRUE(is_associative(*A));
  // in characteristic 2 a tensor product with a symplectic factor is symplectic
  EXPECT_EQ(involution_type(*A), InvolutionType::symplectic);
}

TEST(Algebra, MatrixOverQuaternionDegree) {
  Quat Q = division_Q();
  Expr e = AlgebraExpression::matrix(2, AlgebraExpression::quat(Q));
  EXPECT_EQ(e->degree(), 4u);
  Alg A = materialize(e);
  EXPECT_EQ(A->dim(), 16u);
  EXPECT_TRUE(is_associative(*A));
  EXPECT_EQ(known_index(e, 1), std::optional<size_t>(2));
}

TEST(Algebra, RandomInvolutionLaws) {
  std::mt19937_64 rng(7);
  Field f = F2t();
  Quat Q = division_Q(), Q2 = QuaternionAlgebra::make(t(f), t(f) + c(f, 1));
  std::vector<Expr> exprs = {
      AlgebraExpression::quat(Q),
      AlgebraExpression::tensor(AlgebraExpression::quat(Q), AlgebraExpression::quat(Q2)),
      AlgebraExpression::matrix(2, AlgebraExpression::quat(Q)),
      AlgebraExpression::adjoint(alt(f, 2)),
      AlgebraExpression::adjoint(BilinearForm::diagonal(f, {c(f, 1), t(f), t(f) + c(f, 1)})),
      AlgebraExpression::adjoint(HermitianForm::diagonal(Q, {c(f, 1), t(f)})),
  };
  for (const auto& e : exprs) {
    Alg A = materialize(e);
    SCOPED_TRACE(e->to_string());
    check_laws(*A, 200, rng);
  }
}

TEST(Algebra, InvolutionTypes) {
  Field f = F2t();
  Quat Q = division_Q();
  EXPECT_EQ(involution_type(*materialize(AlgebraExpression::quat(Q))), InvolutionType::symplectic);
  EXPECT_EQ(involution_type(*materialize(AlgebraExpression::adjoint(alt(f, 1)))), InvolutionType::symplectic);
  EXPECT_EQ(involution_type(*materialize(AlgebraExpression::adjoint(BilinearForm::diagonal(f, {c(f, 1), t(f)})))),
            InvolutionType::orthogonal);
  EXPECT_EQ(involution_type(*materialize(AlgebraExpression::matrix(2, AlgebraExpression::quat(Q)))),
            InvolutionType::symplectic);
  EXPECT_EQ(involution_type(*materialize(AlgebraExpression::adjoint(HermitianForm::diagonal(Q, {c(f, 1), t(f)})))),
            InvolutionType::symplectic);
}

TEST(Algebra, TwistRequiresSymmetricUnit) {
  Quat Q = division_Q();
  Expr q = AlgebraExpression::quat(Q);
  EXPECT_THROW(materialize(AlgebraExpression::twist(q, Q->u().x)), Error);
  Alg A = materialize(AlgebraExpression::twist(q, Q->v().x));
  // Int(v) o bar is orthogonal on a quaternion algebra
  EXPECT_EQ(involution_type(*A), InvolutionType::orthogonal);
  Field f = Q->field();
  EXPECT_THROW(materialize(AlgebraExpression::matrix(
                   3, AlgebraExpression::matrix(3, AlgebraExpression::base(f)))),
               Error);
}

TEST(Algebra, HyperbolicityExamples) {
  Field f = F2t();
  Quat Q = division_Q();
  const auto h = hyperbolicity(AlgebraExpression::adjoint(alt(f, 1)), 1);
  ASSERT_TRUE(h.is_yes());
  Alg A = materialize(AlgebraExpression::adjoint(alt(f, 1)));
  const Vec& e = *h.witness;
  EXPECT_EQ(A->mul(e, e), e);
  EXPECT_EQ(A->sigma(e), add(A->one(), e));
  // hyperbolic implies isotropic: sigma(e) e = 0
  EXPECT_TRUE(is_zero(A->mul(A->sigma(e), e)));

  EXPECT_EQ(hyperbolicity(AlgebraExpression::quat(Q), 1).kind, VerdictKind::no);
  EXPECT_EQ(isotropy(AlgebraExpression::quat(Q), 1).kind, VerdictKind::no);

  // split quaternions [0, t) = M2
  Quat S = QuaternionAlgebra::make(Value::zero(f), t(f));
  EXPECT_TRUE(hyperbolicity(AlgebraExpression::quat(S), 1).is_yes());

  // (Q, bar) (x) (Q, bar) is split and hyperbolic
  Expr QQ = AlgebraExpression::tensor(AlgebraExpression::quat(Q), AlgebraExpression::quat(Q));
  const auto hq = hyperbolicity(QQ, 1);
  ASSERT_TRUE(hq.is_yes());
  Alg B = materialize(QQ);
  EXPECT_EQ(B->mul(*hq.witness, *hq.witness), *hq.witness);
  EXPECT_EQ(B->sigma(*hq.witness), add(B->one(), *hq.witness));
  EXPECT_TRUE(isotropy(QQ, 1).is_yes());

  // orthogonal: never hyperbolic in characteristic 2
  EXPECT_EQ(hyperbolicity(AlgebraExpression::adjoint(BilinearForm::diagonal(f, {c(f, 1), t(f)})), 1).kind,
            VerdictKind::no);
}

TEST(Algebra, TwoByTwoAdjointsAgreeWithBruteForce) {
  for (Field f : {F2(), F4()}) {
    const uint32_t q = f->size_finite();
    for (uint32_t a = 0; a < q; ++a)
      for (uint32_t bb = 0; bb < q; ++bb)
        for (uint32_t d = 0; d < q; ++d) {
          const Value va = Value::from_finite(f, a), vb = Value::from_finite(f, bb), vd = Value::from_finite(f, d);
          Matrix B = Matrix::from_rows(f, {{va, vb}, {vb, vd}});
          if (det(B).is_zero()) continue;
          const Matrix Bi = *inverse(B);
          auto sig = [&](const Matrix& X) { return Bi * X.transpose() * B; };
          bool iso = false, hyp = false;
          oracle::for_each_vector(f, 4, [&](const Vec& x) {
            const Matrix X = as_matrix(f, x, 2);
            if (!is_zero(x) && sig(X) * X == Matrix(f, 2, 2)) iso = true;
            if (X * X == X && sig(X) == X + Matrix::identity(f, 2)) hyp = true;
            return false;
          });
          Expr e = AlgebraExpression::adjoint(BilinearForm(B));
          SCOPED_TRACE(e->to_string());
          const auto vi = isotropy(e, 0), vh = hyperbolicity(e, 0);
          ASSERT_NE(vi.kind, VerdictKind::unknown);
          ASSERT_NE(vh.kind, VerdictKind::unknown);
          EXPECT_EQ(vi.is_yes(), iso);
          EXPECT_EQ(vh.is_yes(), hyp);
        }
  }
}

TEST(Algebra, DiagonalizeHermitian) {
  Quat Q = division_Q();
  Field f = Q->field();
  const Quaternion z = Q->scalar(Value::zero(f));
  std::vector<std::vector<Quaternion>> H = {
      {Q->scalar(c(f, 1)), Q->u() + Q->v()},
      {Q->conj(Q->u() + Q->v()), Q->scalar(t(f))},
  };
  HermitianForm h(Q, H);
  const auto D = diagonalize_hermitian(h);
  ASSERT_EQ(D.diagonal.size(), 2u);
  // conj(P)^T H P computed directly
  for (size_t i = 0; i < 2; ++i)
    for (size_t j = 0; j < 2; ++j) {
      Quaternion acc = z;
      for (size_t k = 0; k < 2; ++k)
        for (size_t l = 0; l < 2; ++l) acc = acc + Q->conj(D.change[k][i]) * H[k][l] * D.change[l][j];
      EXPECT_EQ(acc, i == j ? Q->scalar(D.diagonal[i]) : z);
    }

  // zero diagonal, off-diagonal entry forces the e_i + e_j c step
  std::vector<std::vector<Quaternion>> H2 = {{z, Q->u()}, {Q->conj(Q->u()), z}};
  const auto D2 = diagonalize_hermitian(HermitianForm(Q, H2));
  for (const auto& d : D2.diagonal) EXPECT_FALSE(d.is_zero());

  std::vector<std::vector<Quaternion>> H3 = {{z, z}, {z, Q->scalar(c(f, 1))}};
  EXPECT_THROW(diagonalize_hermitian(HermitianForm(Q, H3)), Error);
  std::vector<std::vector<Quaternion>> H4 = {{Q->u(), z}, {z, Q->one()}};
  EXPECT_THROW(HermitianForm(Q, H4), Error);
}

TEST(Algebra, DecomposeBrauerQ) {
  Quat Q = division_Q();
  Field f = Q->field();
  {
    const auto dec = decompose_brauer_Q(AlgebraExpression::adjoint(HermitianForm::diagonal(Q, {c(f, 1)})));
    EXPECT_EQ(dec.b.gram(), Matrix::identity(f, 1));
  }
  {
    const auto dec = decompose_brauer_Q(AlgebraExpression::adjoint(HermitianForm::diagonal(Q, {c(f, 1), t(f)})));
    EXPECT_EQ(dec.b.gram(), BilinearForm::diagonal(f, {c(f, 1), t(f)}).gram());
  }
  std::vector<std::vector<Quaternion>> H = {
      {Q->scalar(c(f, 1)), Q->w()},
      {Q->conj(Q->w()), Q->scalar(c(f, 1))},
  };
  const auto dec = decompose_brauer_Q(AlgebraExpression::adjoint(HermitianForm(Q, H)));
  EXPECT_TRUE(dec.map.verify());
  // multiplicative and sigma-compatible on random elements
  std::mt19937_64 rng(3);
  const Alg& S = dec.map.source;
  const Alg& T = dec.map.target;
  for (int k = 0; k < 100; ++k) {
    const Vec x = random_element(*S, 1, rng), y = random_element(*S, 1, rng);
    EXPECT_EQ(dec.map.M.apply(S->mul(x, y)), T->mul(dec.map.M.apply(x), dec.map.M.apply(y)));
    EXPECT_EQ(dec.map.M.apply(S->sigma(x)), T->sigma(dec.map.M.apply(x)));
  }
  EXPECT_THROW(decompose_brauer_Q(AlgebraExpression::quat(Q)), Error);
}

TEST(Algebra, ContainsQ) {
  Quat Q = division_Q();
  Field f = Q->field();
  Quat Q2 = QuaternionAlgebra::make(t(f), t(f) + c(f, 1));
  auto check = [&](const Algebra& A, const QuaternionPair& pq) {
    const Vec one = A.one();
    EXPECT_EQ(add(A.mul(pq.p, pq.p), pq.p), A.scalar(Q->r()));
    EXPECT_EQ(A.mul(pq.q, pq.q), A.scalar(Q->s()));
    EXPECT_EQ(A.mul(pq.p, pq.q), A.mul(pq.q, add(one, pq.p)));
    EXPECT_EQ(A.sigma(pq.p), add(one, pq.p));
    EXPECT_EQ(A.sigma(pq.q), pq.q);
  };
  {
    Expr e = AlgebraExpression::tensor(AlgebraExpression::quat(Q2), AlgebraExpression::quat(Q));
    Alg A = materialize(e);
    const auto v = contains_Q_canonical(e, Q, 1);
    ASSERT_TRUE(v.is_yes());
    check(*A, *v.witness);
    EXPECT_THROW(contains_Q_canonical(AlgebraExpression::adjoint(BilinearForm::diagonal(f, {c(f, 1), t(f)})), Q, 1),
                 Error);
  }
  {
    // (Q2, tau) (x) (Q, bar) with tau = Int(v) o bar orthogonal: symplectic, contains 1 (x) u, 1 (x) v
    Expr tau = AlgebraExpression::twist(AlgebraExpression::quat(Q2), Q2->v().x);
    Expr e = AlgebraExpression::tensor(tau, AlgebraExpression::quat(Q));
    Alg A = materialize(e);
    const auto v = contains_Q_canonical(e, Q, 1);
    ASSERT_TRUE(v.is_yes());
    check(*A, *v.witness);
    Vec p = zero_vec(f, 16), q = zero_vec(f, 16);
    p[1] = Value::one(f);
    q[2] = Value::one(f);
    EXPECT_EQ(v.witness->p, p);
    EXPECT_EQ(v.witness->q, q);
  }
  {
    Expr e = AlgebraExpression::adjoint(alt(f, 2));
    const auto v = contains_Q_canonical(e, Q, 1);
    ASSERT_TRUE(v.is_yes());
    check(*materialize(e), *v.witness);
  }
  {
    Expr e = AlgebraExpression::adjoint(alt(f, 3));
    const auto v = contains_Q_canonical(e, Q, 1);
    EXPECT_EQ(v.kind, VerdictKind::no);
  }
  {
    std::vector<std::vector<Quaternion>> H = {
        {Q->scalar(c(f, 1)), Q->w()},
        {Q->conj(Q->w()), Q->scalar(c(f, 1))},
    };
    Expr e = AlgebraExpression::adjoint(HermitianForm(Q, H));
    const auto v = contains_Q_canonical(e, Q, 1);
    ASSERT_TRUE(v.is_yes());
    check(*materialize(e), *v.witness);
  }
}

TEST(Algebra, SymplecticBasis) {
  Field f = F2t();
  Matrix G = Matrix::from_rows(f, {{Value::zero(f), t(f), c(f, 1), Value::zero(f)},
                                   {t(f), Value::zero(f), Value::zero(f), c(f, 1)},
                                   {c(f, 1), Value::zero(f), Value::zero(f), t(f) + c(f, 1)},
                                   {Value::zero(f), c(f, 1), t(f) + c(f, 1), Value::zero(f)}});
  BilinearForm b(G);
  ASSERT_TRUE(b.is_nondegenerate());
  const auto S = symplectic_basis(b);
  ASSERT_EQ(S.size(), 4u);
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) {
      const bool paired = (i / 2 == j / 2) && i != j;
      EXPECT_EQ(b(S[i], S[j]), paired ? Value::one(f) : Value::zero(f));
    }
}
