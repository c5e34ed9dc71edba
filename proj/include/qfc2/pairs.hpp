#pragma once

// Quadratic pairs (sigma, f): semi-traces, adjoint pairs, tensor products with f_star,
// the canonical pair on a product of two symplectic involutions, discriminants, and
// hyperbolicity over F_Q.

#include "qfc2/clifford.hpp"

namespace qfc2 {

struct SymCoordinates;

class QuadraticPair {
 public:
  enum class Kind { given, adjoint, tensor, boxtimes };

  /// f given by its values on algebra->sym_basis(). Checks dim Sym = n(n+1)/2 and
  /// f(x + sigma(x)) = Trd(x) on a basis (PreconditionFailed otherwise).
  static QuadraticPair make(Expr expr, Vec values);

  const Expr& expr() const noexcept { return expr_; }
  const Alg& algebra() const noexcept { return A_; }
  Field field() const { return A_->field(); }
  size_t degree() const { return A_->degree(); }
  const Vec& values() const noexcept { return values_; }
  /// f(s) for s in Sym(A, sigma); throws PreconditionFailed when s is not symmetric.
  Value f(const Vec& s) const;
  /// True when f(x + sigma(x)) = Trd(x) on every basis element.
  bool check_semitrace() const;

  Kind kind() const noexcept { return kind_; }
  /// Adjoint pairs: the form.
  const std::optional<QuadraticForm>& form() const noexcept { return form_; }
  /// boxtimes: the two factors; tensor: left is (B, tau), right the expression of the pair.
  const Expr& left() const { return left_; }
  const Expr& right() const { return right_; }
  std::string to_string() const;

 private:
  friend QuadraticPair adjoint_pair(const QuadraticForm& rho);
  friend QuadraticPair tensor_pair(const Expr& B, const QuadraticPair& P);
  friend QuadraticPair boxtimes(const Expr& L, const Expr& R);
  QuadraticPair() = default;
  void attach(Expr expr);
  Expr expr_;
  Alg A_;
  Vec values_;
  Kind kind_ = Kind::given;
  std::optional<QuadraticForm> form_;
  Expr left_, right_;
  std::shared_ptr<const SymCoordinates> coords_;
};

/// (End(V), ad_b, f) with f(x (x) x) = rho(x); throws NotNonsingular (not_nonsingular).
QuadraticPair adjoint_pair(const QuadraticForm& rho);
/// (B, tau) (x) (A, sigma, f) with f_star(b (x) a) = Trd_B(b) f(a).
QuadraticPair tensor_pair(const Expr& B, const QuadraticPair& P);
/// The canonical pair on (L, sigma) (x) (R, tau); throws NotSymplectic (precondition_failed).
QuadraticPair boxtimes(const Expr& L, const Expr& R);

/// Isomorphism M_N(F) -> A (columns: images of E_ij at i N + j) when the presentation is
/// recognisably split; nullopt otherwise.
std::optional<Matrix> split_map(const QuadraticPair& P);
/// rho with P = Ad_rho, read through split_map; throws UnsupportedPresentation (unsupported).
QuadraticForm adjoint_form(const QuadraticPair& P);

/// Algebra isomorphism that intertwines involutions and semi-traces.
struct PairMap {
  QuadraticPair source, target;
  Matrix M;
  bool verify() const;
};
/// Split pairs: similarity of adjoint forms. Otherwise a swap or identity map when the
/// presentations are related that way.
Verdict<Matrix> pair_isomorphic(const QuadraticPair& P1, const QuadraticPair& P2, int height);

/// Idempotent e with f(s) = Trd(e s) on Sym (hence sigma(e) = 1 - e).
Verdict<Vec> pair_hyperbolic(const QuadraticPair& P, int height);
bool check_pair_hyperbolic(const QuadraticPair& P, const Vec& e);

/// Discriminant in F / wp(F); throws UnsupportedPresentation for unsupported shapes.
ArtinSchreierClass pair_discriminant(const QuadraticPair& P);

enum class PairShape { split, brauer_Q, degree4 };
std::string to_string(PairShape s);

struct PairOverFQ {
  PairShape shape = PairShape::split;
  VerdictKind contains_Q = VerdictKind::unknown;
  bool hyperbolic_over_F = false;
  std::optional<QuadraticForm> form;           // split: adjoint form
  size_t witt_index = 0;                       // split
  std::optional<HyperbolicOverFQ> multiple;    // split: anisotropic part = phi (x) n_Q
  std::optional<Vec> idempotent;               // hyperbolic over F
  std::optional<ArtinSchreierClass> discriminant;
  std::optional<Quat> H_plus, H_minus;         // degree 4: Clifford components
  std::optional<IsometryWitness> component_witness;  // n_Q -> norm form of the matching component
};
/// Whether P becomes hyperbolic over F_Q; throws UnsupportedShape (unsupported).
Verdict<PairOverFQ> pair_over_FQ(const QuadraticPair& P, const Quat& Q, int height);
/// The split case on the adjoint form alone, for Ad_rho of any degree.
Verdict<PairOverFQ> adjoint_over_FQ(const QuadraticForm& rho, const Quat& Q, int height);

}  // namespace qfc2
