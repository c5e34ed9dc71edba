#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "qfc2/linalg.hpp"

using namespace qfc2;

namespace {

// Leibniz expansion, independent of elimination.
Value leibniz_det(const Matrix& m) {
  const size_t n = m.rows();
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Value s = Value::zero(m.field());
  do {
    Value p = Value::one(m.field());
    for (size_t i = 0; i < n; ++i) p *= m(i, perm[i]);
    s += p;  // signs vanish in characteristic 2
  } while (std::next_permutation(perm.begin(), perm.end()));
  return s;
}

Matrix random_matrix(Field f, size_t r, size_t c, std::mt19937_64& rng) {
  Matrix m(f, r, c);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) m(i, j) = random_value(f, 1, rng);
  return m;
}

}  // namespace

TEST(Linalg, DeterminantMatchesLeibniz) {
  std::mt19937_64 rng(1);
  for (Field f : {gf(2), rational(gf(1), "t")}) {
    for (int it = 0; it < 10; ++it) {
      Matrix m = random_matrix(f, 4, 4, rng);
      EXPECT_EQ(det(m), leibniz_det(m));
    }
  }
}

TEST(Linalg, InverseKernelSolve) {
  std::mt19937_64 rng(2);
  Field f = rational(gf(1), "t");
  for (int it = 0; it < 10; ++it) {
    Matrix m = random_matrix(f, 4, 4, rng);
    auto inv = inverse(m);
    EXPECT_EQ(inv.has_value(), !det(m).is_zero());
    if (inv) {
      EXPECT_EQ(*inv * m, Matrix::identity(f, 4));
      EXPECT_EQ(m * *inv, Matrix::identity(f, 4));
    }
    Matrix w = random_matrix(f, 3, 5, rng);
    auto ker = kernel(w);
    EXPECT_EQ(ker.size(), 5 - rank(w));
    for (const auto& v : ker) EXPECT_TRUE(is_zero(w.apply(v)));
    Vec x0 = {random_value(f, 1, rng), random_value(f, 1, rng), random_value(f, 1, rng), random_value(f, 1, rng),
              random_value(f, 1, rng)};
    auto x = solve(w, w.apply(x0));
    ASSERT_TRUE(x.has_value());
    EXPECT_EQ(w.apply(*x), w.apply(x0));
  }
  Matrix sing = Matrix::from_rows(gf(1), {{Value::one(gf(1)), Value::one(gf(1))}, {Value::one(gf(1)), Value::one(gf(1))}});
  EXPECT_FALSE(inverse(sing).has_value());
  EXPECT_FALSE(solve(sing, {Value::one(gf(1)), Value::zero(gf(1))}).has_value());
}

TEST(Linalg, ExtendToBasis) {
  Field f = gf(1);
  Vec v = {Value::one(f), Value::one(f), Value::zero(f)};
  auto b = extend_to_basis(f, 3, {v});
  EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0], v);
  EXPECT_EQ(rank(Matrix::from_columns(f, 3, b)), 3u);
}
