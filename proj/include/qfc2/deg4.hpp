#pragma once

// Degree-4 algebras with symplectic involution: Pfaffian norm and trace, the relative
// discriminant, and the classification of involutions hyperbolic over F_Q.

#include "qfc2/algebras.hpp"

namespace qfc2 {

/// sigma = Int(x) o gamma, where gamma is the involution of the base expression.
class Deg4Symplectic {
 public:
  /// Throws PreconditionFailed unless deg 4, gamma symplectic, x in Symd(A, gamma) invertible.
  Deg4Symplectic(Expr base, Vec x);
  /// x = 1.
  explicit Deg4Symplectic(Expr base);

  const Expr& base() const noexcept { return base_; }
  const Vec& x() const noexcept { return x_; }
  const Alg& reference() const noexcept { return gamma_; }
  const Alg& algebra() const noexcept { return sigma_; }
  Field field() const { return gamma_->field(); }

 private:
  Expr base_;
  Vec x_;
  Alg gamma_, sigma_;
};

struct PfaffianData {
  Alg algebra;
  std::vector<Vec> symd_basis;  // 6 elements, the identity first
  QuadraticForm nrp;            // on coordinates over symd_basis
  Vec trp;                      // linear functional on the same coordinates

  /// Coordinates of s in Symd; throws PreconditionFailed when s is not in Symd.
  Vec coordinates(const Vec& s) const;
  Value nrp_of(const Vec& s) const { return nrp(coordinates(s)); }
  Value trp_of(const Vec& s) const { return dot(trp, coordinates(s)); }
};
/// Nrp and Trp from s^2 + Trp(s) s + Nrp(s) = 0 on the determining points of Symd.
PfaffianData pfaffian(const Alg& A);

/// <<c1, c2>> (x) [1, c3].
struct Pfister3 {
  Value c1, c2, c3;
  QuadraticForm form;
  bool hyperbolic = false;
  /// For anisotropic j: scale * form is isometric to the anisotropic part of <<Nrp(x)>> (x) Nrp.
  Value scale;
  std::optional<IsometryWitness> witness;  // scale * form -> anisotropic part
  QuadraticForm source;                     // <<Nrp(x)>> (x) Nrp, 12-dim
  WittDecomposition decomposition;          // of source
};
Pfister3 hyperbolic_pfister3(Field f);

/// The 3-fold Pfister form congruent to <<Nrp(x)>> (x) Nrp mod I^4.
Verdict<Pfister3> relative_discriminant(const Deg4Symplectic& d, int height);

/// Conjugacy of two involutions on the same (A, gamma), by isometry of their discriminants.
Verdict<IsometryWitness> conjugate_test(const Deg4Symplectic& d1, const Deg4Symplectic& d2, int height);

enum class Deg4Case { contains_Q, ad_lambda, not_hyperbolic };
std::string to_string(Deg4Case c);

struct Deg4Classification {
  Deg4Case tag = Deg4Case::not_hyperbolic;
  std::string anisotropy;                     // how anisotropy was established
  std::optional<QuaternionPair> pair;         // contains_Q
  VerdictKind contains_Q = VerdictKind::unknown;
  std::optional<Value> lambda;                // ad_lambda: j = <<lambda>> (x) n_Q
  std::optional<Pfister3> j;
  std::optional<IsometryWitness> j_witness;   // j.form -> <<lambda>> (x) n_Q
  VerdictKind algebra_division = VerdictKind::unknown;
  /// Base M2(Q'): Q (x) Q' division, and <<lambda>> n_Q -> <<lambda>> n_Q'.
  VerdictKind tensor_division = VerdictKind::unknown;
  std::optional<IsometryWitness> slot_witness;
};
/// Whether sigma becomes hyperbolic over F_Q, with the case of the classification.
/// Precondition: sigma anisotropic (throws when isotropic; Unknown when not settled).
Verdict<Deg4Classification> hyperbolic_over_FQ_deg4(const Deg4Symplectic& d, const Quat& Q, int height);

struct CommonValue {
  Value c;
  Quaternion y;   // <mu> n_Q(y) = c
  Quaternion y2;  // pure, n_Q'(y2) = c
  Value mu;
};
/// A common value of <Nrp(x)> (x) n_Q and the pure norm form of Q', for x in Symd of (Q, bar) (x) (Q', bar).
Verdict<CommonValue> common_value(const Quat& Q, const Quat& Q2, const Vec& x, int height);

/// Albert form b[1,a] + b'[1,a'] + [1,a+a'] of [a,b) (x) [a',b').
QuadraticForm albert_form(const Quat& Q, const Quat& Q2);

}  // namespace qfc2
