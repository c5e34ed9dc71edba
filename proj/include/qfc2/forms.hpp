#pragma once

// Quadratic and symmetric bilinear forms in characteristic 2.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qfc2/fields.hpp"
#include "qfc2/linalg.hpp"

namespace qfc2 {

class BilinearForm {
 public:
  BilinearForm() = default;
  explicit BilinearForm(Matrix gram);  // must be symmetric
  static BilinearForm diagonal(Field f, const Vec& entries);
  /// <<b1,...,bm>> = <1,b1> x ... x <1,bm>
  static BilinearForm pfister(Field f, const Vec& slots);
  /// The hyperbolic bilinear plane with Gram [[0,1],[1,0]].
  static BilinearForm hyperbolic(Field f);

  Field field() const noexcept { return gram_.field(); }
  size_t dim() const noexcept { return gram_.rows(); }
  const Matrix& gram() const noexcept { return gram_; }
  Value operator()(const Vec& x, const Vec& y) const;
  bool is_nondegenerate() const;
  bool is_alternating() const;

  BilinearForm orth(const BilinearForm& o) const;
  BilinearForm tensor(const BilinearForm& o) const;
  BilinearForm scaled(const Value& c) const;
  BilinearForm transform(const Matrix& T) const;  // x, y -> b(Tx, Ty)
  bool operator==(const BilinearForm& o) const { return gram_ == o.gram_; }

 private:
  Matrix gram_;
};

class QuadraticForm {
 public:
  QuadraticForm() = default;
  /// Any square matrix; q(x) = x^T M x. Stored upper triangular.
  explicit QuadraticForm(const Matrix& m);
  static QuadraticForm zero(Field f, size_t n);
  /// [a,b] = a x^2 + xy + b y^2
  static QuadraticForm block(const Value& a, const Value& b);
  static QuadraticForm hyperbolic(Field f);
  /// Quasilinear <c1,...,cs>.
  static QuadraticForm diagonal(Field f, const Vec& entries);
  /// <<b1,...,b_{m-1},c]] = <<b1,...,b_{m-1}>> x [1,c]
  static QuadraticForm pfister(Field f, const Vec& slots, const Value& c);

  Field field() const noexcept { return m_.field(); }
  size_t dim() const noexcept { return m_.rows(); }
  const Matrix& gram_upper() const noexcept { return m_; }
  Matrix polar_gram() const;  // M + M^T
  BilinearForm polar() const { return BilinearForm(polar_gram()); }
  Value operator()(const Vec& x) const;
  Value polar(const Vec& x, const Vec& y) const;

  QuadraticForm orth(const QuadraticForm& o) const;
  QuadraticForm scaled(const Value& c) const;
  /// x -> q(Tx); T is n x m, the result has dimension m.
  QuadraticForm transform(const Matrix& T) const;
  /// Same quadratic polynomial.
  bool operator==(const QuadraticForm& o) const { return m_ == o.m_; }
  bool operator!=(const QuadraticForm& o) const { return !(*this == o); }
  bool is_quasilinear() const;

  /// `[a,b] + [c,d] + <e,f>` when the Gram matrix has that literal shape, else `gram(...)`.
  std::string to_string() const;

 private:
  Matrix m_;
};

/// b (x) q with (b (x) q)(w (x) v) = b(w,w) q(v); coordinates (i,p) -> i*dim q + p.
QuadraticForm tensor(const BilinearForm& b, const QuadraticForm& q);

struct ComposePart {
  Value scalar;
  std::optional<BilinearForm> bilinear;  // when set the part is scalar * (bilinear (x) form)
  QuadraticForm form;
};
QuadraticForm compose(const std::vector<ComposePart>& parts);

// ---- witnesses

/// q_target(T x) = q_source(x) for all x, T invertible.
bool check_isometry(const QuadraticForm& source, const QuadraticForm& target, const Matrix& T);
/// q(E x) = sub(x) for all x, E injective.
bool check_embedding(const QuadraticForm& sub, const QuadraticForm& q, const Matrix& E);

struct IsometryWitness {
  QuadraticForm source;
  QuadraticForm target;
  Matrix T;
  bool verify() const { return check_isometry(source, target, T); }
  IsometryWitness inverse() const;
  /// this: a -> b, next: b -> c  gives a -> c
  IsometryWitness then(const IsometryWitness& next) const;
};

// ---- verdicts

enum class Cert {
  none,
  finite_field_exhaustion,
  degree_parity,
  wp_nonmembership,
  radical_anisotropy,
  invariant_separation,
  dimension,
  structural,
};
std::string to_string(Cert c);

struct AnisotropyCertificate {
  Cert kind = Cert::none;
  /// q -> shape
  Matrix witness;
  QuadraticForm shape;
  /// Degree parity: shape = Q0 (+) t Q1 with t-integral Q0, Q1; q0, q1 are their residue
  /// forms over the base field. The witness maps q with t replaced by t + place (place >= 0)
  /// or 1/t (place = -1) to the shape.
  QuadraticForm q0, q1;
  int place = 0;
  std::vector<AnisotropyCertificate> children;  // for q0 then q1 (empty dims skipped)
};

/// Independent re-verification of an anisotropy certificate for q.
bool check_anisotropy_certificate(const QuadraticForm& q, const AnisotropyCertificate& c);

enum class VerdictKind { yes, no, unknown };
std::string to_string(VerdictKind k);

template <class W>
struct Verdict {
  VerdictKind kind = VerdictKind::unknown;
  std::optional<W> witness;
  Cert cert = Cert::none;
  int height = 0;
  std::string detail;
  std::shared_ptr<const AnisotropyCertificate> anisotropy;

  static Verdict yes(W w, std::string detail = {}) {
    Verdict v;
    v.kind = VerdictKind::yes;
    v.witness = std::move(w);
    v.detail = std::move(detail);
    return v;
  }
  static Verdict no(Cert c, std::string detail = {}) {
    Verdict v;
    v.kind = VerdictKind::no;
    v.cert = c;
    v.detail = std::move(detail);
    return v;
  }
  static Verdict unknown(int h, std::string detail = {}) {
    Verdict v;
    v.kind = VerdictKind::unknown;
    v.height = h;
    v.detail = std::move(detail);
    return v;
  }
  bool is_yes() const { return kind == VerdictKind::yes; }
  bool is_no() const { return kind == VerdictKind::no; }
  bool is_unknown() const { return kind == VerdictKind::unknown; }
};

/// Default search height: complete for finite fields, 4 for one variable, 2 otherwise.
int default_height(Field f);

// ---- analysis and normal forms

enum class Classification { nonsingular, nondegenerate, degenerate };
std::string to_string(Classification c);

struct Analysis {
  size_t dim = 0;
  BilinearForm polar;
  size_t radical_dim = 0;
  Classification classification = Classification::degenerate;
};
Analysis analyze(const QuadraticForm& q);

struct NormalForm {
  std::vector<std::pair<Value, Value>> blocks;  // [a,b]
  Vec diagonal;                                 // quasilinear part
  QuadraticForm form;                           // blocks (+) diagonal
  IsometryWitness witness;                      // form -> q
};
NormalForm block_normalize(const QuadraticForm& q);

/// Arf invariant of a nonsingular form.
ArtinSchreierClass arf(const QuadraticForm& q);

struct IdentityResult {
  QuadraticForm input;
  QuadraticForm output;
  IsometryWitness witness;  // input -> output
};
/// The five basic rewrites, each with a closed-form witness.
///   1: (b1,b2,c1,c2)  [b1,b2] (+) [c1,c2]  ->  [b1+c1,b2] (+) [c1,b2+c2]
///   2: (b1,b2)        [1,b1] (+) [1,b2]    ->  [1,b1+b2] (+) H
///   3: (x,b1,b2)      x[b1,b2]             ->  [x b1, x^-1 b2]
///   4: (b1,b2,c1)     [b1,b2] (+) <c1>     ->  [b1+c1,b2] (+) <c1>
///   5: (b1,b2,c1)     [b1,b2] (+) <c1>     ->  H (+) <c1>, input must be isotropic
/// Throws PreconditionFailed on bad operands; 5 is Unknown when isotropy is not settled.
Verdict<IdentityResult> apply_identity(int id, const Vec& operands, int height = -1);

// ---- oracles

Verdict<Vec> isotropic_vector(const QuadraticForm& q, int height);
/// A certificate that q is anisotropic, when one of the registered schemes applies.
std::optional<AnisotropyCertificate> certify_anisotropic(const QuadraticForm& q);

struct WittDecomposition {
  size_t index = 0;
  QuadraticForm anisotropic_part;
  IsometryWitness witness;  // q -> index*H (+) anisotropic_part
  Verdict<Vec> residual;    // isotropy verdict for the anisotropic part
  /// Hyperbolic pairs (v_i, w_i) in q-coordinates: q(v)=q(w)=0, b(v,w)=1.
  std::vector<std::pair<Vec, Vec>> planes;
};
WittDecomposition witt_decompose(const QuadraticForm& q, int height);

Verdict<IsometryWitness> is_isometric(const QuadraticForm& q1, const QuadraticForm& q2, int height);

Verdict<Vec> represents(const QuadraticForm& q, const Value& c, int height);

/// Embedding E with q(Ex) = sub(x).
Verdict<Matrix> dominates(const QuadraticForm& q, const QuadraticForm& sub, int height);

struct CommonSlot {
  Value d;
  IsometryWitness w1;  // <<c1>>pi1 -> <<d>>pi1
  IsometryWitness w2;  // <<d>>pi1 -> <<d>>pi2
  IsometryWitness w3;  // <<c2>>pi2 -> <<d>>pi2
};
Verdict<CommonSlot> common_slot(const QuadraticForm& pi1, const QuadraticForm& pi2, const Value& c1,
                                const Value& c2, int height);

struct NscTransfer {
  Value d2;  // d''
  IsometryWitness witness;  // [b1,b2] (+) d[1,d'] -> [c1,c2] (+) d[1,d'']
};
Verdict<NscTransfer> nsc_transfer(const Value& b1, const Value& b2, const Value& c1, const Value& c2, const Value& d,
                                  const Value& d1, int height);

struct HyperbolicOverFQ {
  BilinearForm multiplier;  // q = multiplier (x) n_Q
  IsometryWitness witness;  // q -> multiplier (x) n_Q
};
/// q hyperbolic over the function field of the conic of Q, for anisotropic q; nQ is the norm form of Q.
Verdict<HyperbolicOverFQ> hyperbolic_over_FQ(const QuadraticForm& q, const QuadraticForm& nQ, int height);

/// Coordinates a_e of c = sum_e a_e^2 x^e over the monomial p-basis x^e, e in {0,1}^n.
Vec p_basis_coordinates(const Value& c);

}  // namespace qfc2
