#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qfc2/clifford.hpp"

using namespace qfc2;

namespace {

Field F2() { return gf(1); }
Field F4() { return gf(2); }
Field F2t() { return rational(gf(1), "t"); }
Field F2st() { return rational(rational(gf(1), "s"), "t"); }
Value c(Field f, uint32_t b) { return Value::constant(f, b); }
Value var(Field f, const char* name) { return Value::variable(f, name); }

QuadraticForm blk(const Value& a, const Value& b) { return QuadraticForm::block(a, b); }
QuadraticForm diag(Field f, const Vec& d) { return QuadraticForm::diagonal(f, d); }

QuadraticForm random_nondegenerate(Field f, size_t n, int h, std::mt19937_64& rng) {
  for (;;) {
    QuadraticForm q = oracle::random_form(f, n, h, rng);
    const Analysis an = analyze(q);
    if (an.classification != Classification::degenerate && an.radical_dim == n % 2) return q;
  }
}

// <1> + 2 x H
QuadraticForm split5(Field f) {
  return diag(f, {c(f, 1)}).orth(QuadraticForm::hyperbolic(f)).orth(QuadraticForm::hyperbolic(f));
}

bool is_scalar_multiple(const Algebra& A, const Vec& x, const Value& v) { return x == A.scalar(v); }

}  // namespace

TEST(Clifford, StraighteningAndInvolution) {
  std::mt19937_64 rng(11);
  for (Field f : {F2(), F4(), F2t()})
    for (size_t n = 3; n <= 6; ++n) {
      const QuadraticForm q = random_nondegenerate(f, n, 1, rng);
      const EvenClifford C = even_clifford(q);
      const Algebra& A = *C.algebra;
      ASSERT_EQ(A.dim(), size_t{1} << (n - 1));
      ASSERT_EQ(A.labels()[0], "1");
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
          const Vec ei = unit_vec(f, n, i), ej = unit_vec(f, n, j);
          if (i == j) {
            EXPECT_TRUE(is_scalar_multiple(A, C.product(ei, ei), q(ei)));
          } else {
            EXPECT_TRUE(is_scalar_multiple(A, add(C.product(ei, ej), C.product(ej, ei)), q.polar(ei, ej)));
          }
        }
      for (int trial = 0; trial < 10; ++trial) {
        const Vec x = random_element(A, 1, rng), y = random_element(A, 1, rng), z = random_element(A, 1, rng);
        EXPECT_EQ(A.mul(A.mul(x, y), z), A.mul(x, A.mul(y, z)));
        EXPECT_EQ(A.sigma(A.sigma(x)), x);
        EXPECT_EQ(A.sigma(A.mul(x, y)), A.mul(A.sigma(y), A.sigma(x)));
      }
      // tau_0 reverses products of vectors
      const Vec u = oracle::random_invertible(f, n, 1, rng).column(0), v = oracle::random_invertible(f, n, 1, rng).column(0);
      EXPECT_EQ(A.sigma(C.product(u, v)), C.product(v, u));
    }
}

TEST(Clifford, BasisOrder) {
  std::mt19937_64 rng(3);
  const EvenClifford C = even_clifford(random_nondegenerate(F2(), 4, 1, rng));
  const std::vector<std::string> expected{"1", "e1e2", "e1e3", "e1e4", "e2e3", "e2e4", "e3e4", "e1e2e3e4"};
  EXPECT_EQ(C.algebra->labels(), expected);
}

TEST(Clifford, Errors) {
  Field f = F2t();
  const Value t = var(f, "t");
  auto kind_of = [](const QuadraticForm& q) {
    try {
      even_clifford(q);
    } catch (const Error& e) {
      return e.kind();
    }
    return Error::Kind::criteria_disagree;
  };
  EXPECT_EQ(kind_of(blk(c(f, 1), t)), Error::Kind::unsupported);
  EXPECT_EQ(kind_of(split5(f).orth(QuadraticForm::hyperbolic(f))), Error::Kind::unsupported);
  EXPECT_EQ(kind_of(diag(f, {c(f, 1), t, t + c(f, 1)})), Error::Kind::degenerate_input);
  EXPECT_EQ(kind_of(blk(c(f, 1), t).orth(diag(f, {c(f, 1), t}))), Error::Kind::degenerate_input);
}

// center of C_0 of a 4-dimensional form: found by brute force, compared with the zero count
TEST(Clifford, Dim4CenterFinite) {
  std::mt19937_64 rng(5);
  for (Field f : {F2(), F4()})
    for (int trial = 0; trial < 4; ++trial) {
      const Value a = random_value(f, 0, rng), a2 = random_value(f, 0, rng);
      const QuadraticForm q = blk(c(f, 1), a).orth(blk(c(f, 1), a2));
      const Alg Aptr = even_clifford(q).algebra;
      const Algebra& A = *Aptr;
      std::optional<Vec> z;
      oracle::for_each_vector(f, A.dim(), [&](const Vec& x) {
        if (A.as_scalar(x)) return false;
        for (size_t i = 0; i < A.dim(); ++i)
          if (A.mul(x, A.basis(i)) != A.mul(A.basis(i), x)) return false;
        z = x;
        return true;
      });
      ASSERT_TRUE(z);
      // z^2 = alpha z + beta; z / alpha satisfies X^2 + X + beta / alpha^2
      const Vec z2 = A.mul(*z, *z);
      std::optional<Value> al;
      for (size_t k = 0; k < A.dim(); ++k)
        if (!(*z)[k].is_zero() && k != 0) {
          al = z2[k] / (*z)[k];
          break;
        }
      ASSERT_TRUE(al && !al->is_zero());
      const auto beta = A.as_scalar(add(z2, scale(*z, *al)));
      ASSERT_TRUE(beta);
      const Value cst = *beta / al->square();
      const bool in_wp = oracle::for_each_vector(f, 1, [&](const Vec& x) { return x[0].square() + x[0] == cst; });
      EXPECT_EQ(!in_wp, oracle::arf_by_count(q) == 1) << q.to_string();
      EXPECT_EQ(in_wp, (a + a2 == Value::zero(f)) || as_class(a + a2).is_trivial());
    }
}

TEST(Clifford, Dim4CenterFunctionField) {
  Field f = F2st();
  const Value s = var(f, "s"), t = var(f, "t");
  for (const auto& [a, a2] : std::vector<std::pair<Value, Value>>{{s, t}, {c(f, 1), s * t}, {s, s}, {t, s + c(f, 1)}}) {
    const QuadraticForm q = blk(c(f, 1), a).orth(blk(c(f, 1), a2));
    const Alg Aptr = even_clifford(q).algebra;
    const Algebra& A = *Aptr;
    const auto Z = center_basis(A);
    ASSERT_EQ(Z.size(), 2u);
    for (const Vec& z : Z)
      for (size_t i = 0; i < A.dim(); ++i) ASSERT_EQ(A.mul(z, A.basis(i)), A.mul(A.basis(i), z));
    const Vec z = A.as_scalar(Z[0]) ? Z[1] : Z[0];
    const Vec z2 = A.mul(z, z);
    // z^2 = alpha z + beta
    const auto ab = solve(Matrix::from_columns(f, A.dim(), {z, A.one()}), z2);
    ASSERT_TRUE(ab);
    ASSERT_FALSE((*ab)[0].is_zero());
    const Value cst = (*ab)[1] / (*ab)[0].square();
    EXPECT_EQ(as_class(cst), as_class(a + a2));
    EXPECT_EQ(as_class(cst), arf(q));
  }
}

// <1> + b[1,a]: u = e2 e3 / b, v = e1 e2 span a copy of [a,b)
TEST(Clifford, Dim3IsQuaternion) {
  std::mt19937_64 rng(17);
  for (Field f : {F4(), F2t(), F2st()})
    for (int trial = 0; trial < 4; ++trial) {
      const Value a = random_value(f, 1, rng), b = random_nonzero(f, 1, rng);
      const QuadraticForm q = diag(f, {c(f, 1)}).orth(blk(c(f, 1), a).scaled(b));
      const EvenClifford C = even_clifford(q);
      const Alg& A = C.algebra;
      ASSERT_EQ(A->degree(), 2u);
      const Vec e1 = unit_vec(f, 3, 0), e2 = unit_vec(f, 3, 1), e3 = unit_vec(f, 3, 2);
      const Vec u = scale(C.product(e2, e3), b.inv()), v = C.product(e1, e2);
      EXPECT_EQ(add(A->mul(u, u), u), A->scalar(a));
      EXPECT_EQ(A->mul(v, v), A->scalar(b));
      EXPECT_EQ(add(A->mul(u, v), A->mul(v, u)), v);
      const Quat H = QuaternionAlgebra::make(a, b);
      const AlgebraMap m{materialize(AlgebraExpression::quat(H)), A,
                         Matrix::from_columns(f, 4, {A->one(), u, v, A->mul(u, v)})};
      EXPECT_TRUE(m.verify());
      EXPECT_EQ(involution_type(*A), InvolutionType::symplectic);
    }
}

TEST(Clifford, Dim5Structure) {
  std::mt19937_64 rng(23);
  for (Field f : {F2(), F4(), F2t()}) {
    const EvenClifford C = even_clifford(random_nondegenerate(f, 5, 1, rng));
    EXPECT_EQ(C.algebra->degree(), 4u);
    EXPECT_EQ(center_basis(*C.algebra).size(), 1u);
    EXPECT_EQ(involution_type(*C.algebra), InvolutionType::symplectic);
    const TensorModel tm = tensor_model(C);
    EXPECT_TRUE(tm.map.verify());
  }
}

TEST(Clifford, IsotropicGivesHyperbolic) {
  std::mt19937_64 rng(29);
  std::vector<QuadraticForm> corpus{split5(F2()), split5(F4()), split5(F2t())};
  for (Field f : {F2(), F4()})
    for (int i = 0; i < 4; ++i) corpus.push_back(random_nondegenerate(f, 5, 1, rng));
  corpus.push_back(diag(F2t(), {var(F2t(), "t")}).orth(blk(c(F2t(), 1), var(F2t(), "t"))).orth(QuadraticForm::hyperbolic(F2t())));
  for (const QuadraticForm& q : corpus) {
    Field f = q.field();
    if (f->is_finite()) ASSERT_TRUE(oracle::brute_isotropic(q));
    const Alg Aptr = even_clifford(q).algebra;
    const Algebra& A = *Aptr;
    const auto h = hyperbolicity(A, default_height(f));
    ASSERT_TRUE(h.is_yes()) << q.to_string();
    EXPECT_EQ(A.mul(*h.witness, *h.witness), *h.witness);
    EXPECT_EQ(A.sigma(*h.witness), add(A.one(), *h.witness));
  }
}

TEST(Clifford, RoundTripFinite) {
  std::mt19937_64 rng(31);
  for (Field f : {F2(), F4()}) {
    std::vector<QuadraticForm> corpus{split5(f)};
    for (int i = 0; i < 6; ++i) corpus.push_back(random_nondegenerate(f, 5, 1, rng));
    for (const QuadraticForm& q : corpus) {
      const RecoveredForm R = recover_form(even_clifford(q));
      ASSERT_EQ(R.form.dim(), 5u);
      EXPECT_EQ(oracle::brute_isotropic(R.form), oracle::brute_isotropic(q));
      const auto sim = similar(R.form, q, default_height(f));
      ASSERT_TRUE(sim.is_yes()) << q.to_string();
      EXPECT_TRUE(oracle::isometry_by_points(R.form.scaled(sim.witness->factor), q, sim.witness->witness.T));
    }
  }
}

TEST(Clifford, RoundTripFunctionField) {
  Field f = F2t();
  const Value t = var(f, "t");
  const QuadraticForm q = diag(f, {t}).orth(blk(c(f, 1), t)).orth(QuadraticForm::hyperbolic(f));
  const RecoveredForm R = recover_form(even_clifford(q));
  const auto sim = similar(R.form, q, 2);
  ASSERT_TRUE(sim.is_yes());
  EXPECT_TRUE(oracle::isometry_by_points(R.form.scaled(sim.witness->factor), q, sim.witness->witness.T));
  // Symd^0 elements are tau_0-symmetric with zero Pfaffian trace
  const PfaffianData P = pfaffian(even_clifford(q).algebra);
  for (const Vec& y : R.basis) EXPECT_TRUE(P.trp_of(y).is_zero());
}

// (Q', Int(y) o bar) (x) (Q, bar): Nrp on y (x) span(1, v, w) is y^2 (<1> + b[1,a])
TEST(Clifford, DecomposedNrp) {
  Field f = F2st();
  const Value s = var(f, "s"), t = var(f, "t");
  const Quat Qp = QuaternionAlgebra::make(s, t);
  const Quat Q = QuaternionAlgebra::make(s + c(f, 1), s * t);
  const Expr base = AlgebraExpression::tensor(AlgebraExpression::quat(Qp), AlgebraExpression::quat(Q));
  const Vec y = Qp->v().x;  // y^2 = t
  Vec x = zero_vec(f, 16);
  for (size_t i = 0; i < 4; ++i) x[4 * i] = y[i];
  const Deg4Symplectic d(base, x);
  const PfaffianData P = pfaffian(d.algebra());
  std::vector<Vec> span;
  for (size_t k : {0u, 2u, 3u}) {
    Vec e = zero_vec(f, 16);
    for (size_t i = 0; i < 4; ++i) e[4 * i + k] = y[i];
    span.push_back(e);
  }
  ASSERT_EQ(Qp->mul(Qp->v(), Qp->v()), Qp->scalar(t));
  const QuadraticForm expected = Q->pure_norm_form().scaled(t);
  const Matrix E = Matrix::from_columns(f, 16, span);
  for (size_t i = 0; i < 3; ++i)
    for (size_t j = i; j < 3; ++j) {
      Vec z = unit_vec(f, 3, i);
      if (j != i) z[j] = Value::one(f);
      EXPECT_EQ(P.nrp_of(E.apply(z)), expected(z));
      EXPECT_TRUE(P.trp_of(E.apply(z)).is_zero());
    }
}

TEST(Clifford, EmbedQFromDomination) {
  Field f = F2t();
  const Value t = var(f, "t"), one = c(f, 1);
  const QuadraticForm conic = blk(one, one).orth(diag(f, {t}));
  for (const Value& scal : {one, t + one}) {
    const QuadraticForm q = conic.scaled(scal).orth(QuadraticForm::hyperbolic(f));
    const EvenClifford C = even_clifford(q);
    const auto r = embed_Q_from_domination(C, one, t, 2);
    ASSERT_TRUE(r.is_yes());
    const Algebra& A = *C.algebra;
    const Vec& p = r.witness->pair.p;
    const Vec& qq = r.witness->pair.q;
    EXPECT_TRUE(oracle::embedding_by_points(conic.scaled(r.witness->factor), q, r.witness->embedding));
    EXPECT_EQ(add(A.mul(p, p), p), A.scalar(one));
    EXPECT_EQ(A.mul(qq, qq), A.scalar(t));
    EXPECT_EQ(A.mul(p, qq), A.mul(qq, add(A.one(), p)));
    EXPECT_EQ(A.sigma(p), add(A.one(), p));
    EXPECT_EQ(A.sigma(qq), qq);
  }
  EXPECT_THROW(embed_Q_from_domination(even_clifford(split5(f)), one, Value::zero(f), 1), Error);
}

TEST(Clifford, MinimalIsotropicAndDominating) {
  {
    Field f = F2t();
    const Quat Q = QuaternionAlgebra::make(c(f, 1), var(f, "t"));
    const auto r = fq_minimal_5(split5(f), Q, 2);
    ASSERT_TRUE(r.is_no());
    EXPECT_EQ(r.witness->isotropic_over_F, VerdictKind::yes);
    EXPECT_TRUE(split5(f)(*r.witness->isotropic_vector).is_zero());
  }
  {
    Field f = F2st();
    const Value s = var(f, "s"), t = var(f, "t"), one = c(f, 1);
    const QuadraticForm psi = blk(one, one).orth(blk(one, one).scaled(s)).orth(diag(f, {t}));
    const Quat Q = QuaternionAlgebra::make(one, t);
    const auto r = fq_minimal_5(psi, Q, 1);
    ASSERT_TRUE(r.witness);
    const Minimal5Report& rep = *r.witness;
    if (rep.conic) {
      EXPECT_TRUE(r.is_no());
      const QuadraticForm conic = blk(one, one).orth(diag(f, {t}));
      EXPECT_TRUE(oracle::embedding_by_points(conic.scaled(rep.conic->factor), psi, rep.conic->embedding));
    }
    if (rep.isotropic_over_F == VerdictKind::no && rep.isotropic_over_F_detail.find("tau_0") == std::string::npos) {
      const auto cert = certify_anisotropic(psi);
      ASSERT_TRUE(cert);
      EXPECT_TRUE(check_anisotropy_certificate(psi, *cert));
    }
  }
}

TEST(Clifford, MinimalPreconditions) {
  Field f = F2t();
  const Value t = var(f, "t"), one = c(f, 1);
  const Quat split = QuaternionAlgebra::make(Value::zero(f), t);
  const Quat Q = QuaternionAlgebra::make(one, t);
  EXPECT_THROW(fq_minimal_5(split5(f), split, 2), Error);
  EXPECT_THROW(fq_minimal_5(blk(one, t).orth(blk(one, one)), Q, 2), Error);
}

// rho = [1,1] + t[1,1] + <s> is a subform of <<s>> n_Q' with Q' = [1,t), and <<s>> n_Q' = <<s>> n_Q
TEST(Clifford, MinimalInstance) {
  Field f = F2st();
  const Value s = var(f, "s"), t = var(f, "t"), one = c(f, 1);
  const QuadraticForm rho = blk(one, one).orth(blk(one, one).scaled(t)).orth(diag(f, {s}));
  const Quat Q = QuaternionAlgebra::make(s + one, t * s);
  const auto r = fq_minimal_5(rho, Q, 1);
  ASSERT_TRUE(r.witness);
  const Minimal5Report& rep = *r.witness;
  ASSERT_TRUE(r.is_yes()) << rep.decided_by;
  EXPECT_EQ(rep.tensor_division, VerdictKind::yes);
  EXPECT_EQ(rep.isotropic_over_FQ, VerdictKind::yes);
  EXPECT_EQ(rep.dominates_conic, VerdictKind::no);
  ASSERT_TRUE(rep.lambda);
  ASSERT_TRUE(rep.Qp);
  // the Albert form of Q (x) Q' carries a checked anisotropy certificate
  const QuadraticForm alb = albert_form(Q, *rep.Qp);
  const auto cert = certify_anisotropic(alb);
  ASSERT_TRUE(cert);
  EXPECT_TRUE(check_anisotropy_certificate(alb, *cert));
  const auto rc = certify_anisotropic(rho);
  ASSERT_TRUE(rc);
  EXPECT_TRUE(check_anisotropy_certificate(rho, *rc));
  // j = <<lambda>> n_Q, witnessed
  ASSERT_TRUE(rep.classification && rep.classification->j_witness);
  EXPECT_TRUE(oracle::isometry_by_points(rep.classification->j_witness->source, rep.classification->j_witness->target,
                                         rep.classification->j_witness->T));
}
