#pragma once

// Even Clifford algebras of quadratic forms of dimension 3 to 6 with the canonical
// involution, and the link between 5-dimensional forms and degree-4 symplectic algebras.

#include <cstdint>

#include "qfc2/deg4.hpp"

namespace qfc2 {

/// C_0(rho) on the even products e_S, subsets ordered by size then lexicographically.
struct EvenClifford {
  QuadraticForm form;
  std::vector<uint32_t> subsets;  // bitmasks, in basis order
  Alg algebra;                    // involution: tau_0 (reversal)

  size_t index_of(uint32_t mask) const;
  /// x y for vectors x, y of the underlying space, in C_0 coordinates.
  Vec product(const Vec& x, const Vec& y) const;
};

/// Throws DimensionUnsupported (unsupported) unless 3 <= dim <= 6, Degenerate (degenerate_input).
EvenClifford even_clifford(const QuadraticForm& rho);

/// Basis of the center.
std::vector<Vec> center_basis(const Algebra& A);

/// For dim 5: (C_0, tau_0) as (Q1, bar) (x) (Q2, bar).
struct TensorModel {
  Quat Q1, Q2;
  Expr model;
  AlgebraMap map;  // materialize(model) -> C_0
};
TensorModel tensor_model(const EvenClifford& C);

/// Presentation of a degree-4 symplectic (A, sigma) as Int(x) o (Ad_<1,1> (x) (Q', bar)), x in M2(F) (x) 1.
struct M2Presentation {
  Quat Qp;
  Expr base;        // Ad_<1,1> (x) (Q', bar)
  Vec x;
  AlgebraMap map;   // Deg4Symplectic(base, x).algebra() -> A
};
/// No when A is division (Albert form anisotropic).
Verdict<M2Presentation> m2_presentation(const Alg& A, int height);

struct QFromDomination {
  Value factor;            // rho dominates factor * ([1,a] + <b>)
  Matrix embedding;        // columns f1, f2, f3
  QuaternionPair pair;     // p = f1 f2 / factor, q = f1 f3 / factor
};
/// A tau_0-stable copy of ([a,b), bar) in C_0(rho) built from a domination.
Verdict<QFromDomination> embed_Q_from_domination(const EvenClifford& C, const Value& a, const Value& b, int height);

struct RecoveredForm {
  QuadraticForm form;      // Nrp on Symd^0
  std::vector<Vec> basis;  // of Symd^0, in C_0 coordinates
};
/// Nrp restricted to the kernel of Trp; dim 5 only.
RecoveredForm recover_form(const EvenClifford& C);

struct Similarity {
  Value factor;
  IsometryWitness witness;  // factor * q1 -> q2
};
Verdict<Similarity> similar(const QuadraticForm& q1, const QuadraticForm& q2, int height);

struct Minimal5Report {
  VerdictKind isotropic_over_F = VerdictKind::unknown;
  std::string isotropic_over_F_detail;
  VerdictKind isotropic_over_FQ = VerdictKind::unknown;
  std::string isotropic_over_FQ_detail;
  VerdictKind dominates_conic = VerdictKind::unknown;
  std::string dominates_conic_detail;
  std::optional<QFromDomination> conic;
  std::optional<Vec> isotropic_vector;
  std::optional<Value> lambda;                // condition (a)
  VerdictKind neighbour_check = VerdictKind::unknown;  // rho similar to a subform of <<lambda>> n_Q
  VerdictKind coindex_two = VerdictKind::unknown;      // C_0 = M2(Q')
  std::optional<Quat> Qp;
  VerdictKind tensor_division = VerdictKind::unknown;  // Q (x) Q' division
  std::optional<Deg4Classification> classification;
  std::string decided_by;
};
/// Whether rho is F_Q-minimal. Yes = minimal. Throws PreconditionFailed unless rho is
/// 5-dimensional nondegenerate and Q is certified division.
Verdict<Minimal5Report> fq_minimal_5(const QuadraticForm& rho, const Quat& Q, int height);

}  // namespace qfc2
