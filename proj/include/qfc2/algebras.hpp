#pragma once

// Central simple algebras with involution of the first kind, built from expression trees
// and materialized as exact structure constants.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qfc2/quaternions.hpp"

namespace qfc2 {

class Algebra;
using Alg = std::shared_ptr<const Algebra>;

/// A finite-dimensional associative algebra with an involution, on a fixed basis.
class Algebra {
 public:
  struct Term {
    size_t index;
    Value coeff;
  };
  using Product = std::vector<Term>;

  struct Data {
    Field field = nullptr;
    size_t degree = 0;  // 0 when not central simple
    std::vector<std::string> labels;
    std::vector<Product> table;  // e_i e_j at i * dim + j
    Vec one;
    Matrix involution;           // columns: images of basis vectors
    std::optional<Vec> trd;      // reduced trace on the basis
    std::string name;
    std::vector<Vec> hyperbolic_hints;  // candidate idempotents e with sigma(e) = 1 - e
    std::vector<Vec> isotropic_hints;   // candidate x != 0 with sigma(x) x = 0
    std::vector<std::pair<Vec, Vec>> quaternion_hints;  // candidate (p, q) stable copies of (Q, bar)
  };

  /// Checks associativity-independent invariants: sigma^2 = id and sigma(e_i e_j) = sigma(e_j) sigma(e_i).
  static Alg make(Data data);

  Field field() const noexcept { return d_.field; }
  size_t dim() const noexcept { return d_.labels.size(); }
  size_t degree() const noexcept { return d_.degree; }
  const std::string& name() const noexcept { return d_.name; }
  const std::vector<std::string>& labels() const noexcept { return d_.labels; }
  const Product& product(size_t i, size_t j) const { return d_.table[i * dim() + j]; }
  const Matrix& involution_matrix() const noexcept { return d_.involution; }
  const Data& data() const noexcept { return d_; }

  Vec zero() const { return zero_vec(field(), dim()); }
  Vec one() const { return one_; }
  Vec basis(size_t i) const { return unit_vec(field(), dim(), i); }
  Vec scalar(const Value& c) const { return scale(one_, c); }
  Vec mul(const Vec& a, const Vec& b) const;
  Vec sigma(const Vec& a) const { return d_.involution.apply(a); }
  bool has_trd() const noexcept { return d_.trd.has_value(); }
  Value trd(const Vec& a) const;
  /// Matrix of y -> a y.
  Matrix left_matrix(const Vec& a) const;
  std::optional<Vec> inverse(const Vec& a) const;
  /// c with a = c 1, if a is a scalar.
  std::optional<Value> as_scalar(const Vec& a) const;

  const std::vector<Vec>& sym_basis() const noexcept { return sym_; }
  const std::vector<Vec>& symd_basis() const noexcept { return symd_; }
  /// Same table, involution y -> x sigma(y) x^-1.
  Alg twisted(const Vec& x, const std::string& name) const;

  std::string element_to_string(const Vec& a) const;

 private:
  explicit Algebra(Data d);
  Data d_;
  Vec one_;
  std::vector<Vec> sym_, symd_;
};

/// Random element with coordinates of the given height.
Vec random_element(const Algebra& A, int height, std::mt19937_64& rng);
/// Checks e_i (e_j e_k) = (e_i e_j) e_k on all basis triples.
bool is_associative(const Algebra& A);

// ---- hermitian forms over (Q, bar)

/// h(x, y) = conj(x)^T H y on right Q-vectors, with H conj-transpose symmetric.
class HermitianForm {
 public:
  HermitianForm(Quat Q, std::vector<std::vector<Quaternion>> entries);
  static HermitianForm diagonal(const Quat& Q, const Vec& d);

  const Quat& algebra() const noexcept { return Q_; }
  size_t rank() const noexcept { return h_.size(); }
  const Quaternion& operator()(size_t i, size_t j) const { return h_[i][j]; }
  /// All diagonal values lie in F.
  bool is_alternating() const;
  std::string to_string() const;

 private:
  Quat Q_;
  std::vector<std::vector<Quaternion>> h_;
};

struct HermitianDiagonalization {
  Vec diagonal;                                  // d_i in F^x
  std::vector<std::vector<Quaternion>> change;   // P with conj(P)^T H P = diag(d)
};
HermitianDiagonalization diagonalize_hermitian(const HermitianForm& h);

// ---- expressions

class AlgebraExpression;
using Expr = std::shared_ptr<const AlgebraExpression>;

class AlgebraExpression {
 public:
  enum class Kind { base, quat, matrix, tensor, adjoint_bilinear, adjoint_hermitian, twist };

  static Expr base(Field f);
  static Expr quat(Quat H);
  /// M_n(inner) with X -> sigma(X)^T.
  static Expr matrix(size_t n, Expr inner);
  static Expr tensor(Expr left, Expr right);
  static Expr adjoint(const BilinearForm& b);
  static Expr adjoint(const HermitianForm& h);
  /// Int(x) o sigma_inner; x in coordinates of materialize(inner).
  static Expr twist(Expr inner, Vec x);

  Kind kind() const noexcept { return kind_; }
  Field field() const noexcept { return field_; }
  size_t degree() const noexcept { return degree_; }
  const Quat& quaternion() const { return quat_; }
  size_t size() const noexcept { return n_; }
  const Expr& left() const { return left_; }
  const Expr& right() const { return right_; }
  const std::optional<BilinearForm>& bilinear() const { return b_; }
  const std::optional<HermitianForm>& hermitian() const { return h_; }
  const Vec& twist_element() const { return x_; }
  std::string to_string() const;

 private:
  AlgebraExpression() = default;
  Kind kind_ = Kind::base;
  Field field_ = nullptr;
  size_t degree_ = 1;
  Quat quat_;
  size_t n_ = 0;
  Expr left_, right_;
  std::optional<BilinearForm> b_;
  std::optional<HermitianForm> h_;
  Vec x_;
};

inline constexpr size_t kDegreeCap = 8;

/// Exact structure constants and involution; throws DegreeCapExceeded (unsupported) or
/// TwistNotSymmetric (precondition_failed).
Alg materialize(const Expr& e);
/// Index of the underlying algebra when the tree determines it.
std::optional<size_t> known_index(const Expr& e, int height);

// ---- involution-level oracles

enum class InvolutionType { symplectic, orthogonal };
std::string to_string(InvolutionType t);
/// 1 in Symd, cross-checked against Trd vanishing on Sym; throws CriteriaDisagree.
InvolutionType involution_type(const Algebra& A);

/// x != 0 with sigma(x) x = 0.
Verdict<Vec> isotropy(const Algebra& A, int height, std::optional<size_t> index = std::nullopt);
/// e with e^2 = e and sigma(e) = 1 - e.
Verdict<Vec> hyperbolicity(const Algebra& A, int height, std::optional<size_t> index = std::nullopt);
Verdict<Vec> isotropy(const Expr& e, int height);
Verdict<Vec> hyperbolicity(const Expr& e, int height);

struct QuaternionPair {
  Vec p, q;
};
/// p^2 + p = a, q^2 = b, pq = q(1 + p), sigma(p) = 1 + p, sigma(q) = q.
bool check_quaternion_pair(const Algebra& A, const Value& a, const Value& b, const QuaternionPair& pq);
/// A sigma-stable copy of (Q, bar) in A; requires sigma symplectic.
Verdict<QuaternionPair> contains_Q_canonical(const Algebra& A, const Quat& Q, int height,
                                             std::optional<size_t> index = std::nullopt);
Verdict<QuaternionPair> contains_Q_canonical(const Expr& e, const Quat& Q, int height);

/// Algebra isomorphism A -> B given by the images of the basis (columns).
struct AlgebraMap {
  Alg source, target;
  Matrix M;
  /// Bijective, multiplicative on basis pairs, and intertwines the involutions.
  bool verify() const;
};

struct BrauerQDecomposition {
  BilinearForm b;
  Expr model;       // Ad_b (x) (Q, bar)
  AlgebraMap map;   // model -> materialize(e)
};
BrauerQDecomposition decompose_brauer_Q(const Expr& e);

/// Symplectic basis (e_1, f_1, ..., e_m, f_m) of a nondegenerate alternating form.
std::vector<Vec> symplectic_basis(const BilinearForm& b);

}  // namespace qfc2
