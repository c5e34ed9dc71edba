#pragma once

// Quaternion algebras [r,s) in characteristic 2 with basis (1,u,v,w):
// u(1+u) = r, v^2 = s, w = uv = v(1+u).

#include <array>
#include <memory>

#include "qfc2/forms.hpp"

namespace qfc2 {

class QuaternionAlgebra;
using Quat = std::shared_ptr<const QuaternionAlgebra>;

struct Quaternion {
  Quat alg;
  Vec x;  // coordinates on (1,u,v,w)

  Quaternion operator+(const Quaternion& o) const;
  Quaternion operator*(const Quaternion& o) const;
  Quaternion scaled(const Value& c) const;
  bool operator==(const Quaternion& o) const;
  bool operator!=(const Quaternion& o) const { return !(*this == o); }
  bool is_zero() const;
  std::string to_string() const;
};

class QuaternionAlgebra : public std::enable_shared_from_this<QuaternionAlgebra> {
 public:
  /// Builds the table from the relations and runs the construction self-checks.
  static Quat make(const Value& r, const Value& s);

  Field field() const noexcept { return r_.field(); }
  const Value& r() const noexcept { return r_; }
  const Value& s() const noexcept { return s_; }
  /// Structure constants: e_i e_j = sum_k table(i,j)[k] e_k.
  const Vec& table(size_t i, size_t j) const { return table_[i][j]; }

  Quaternion element(const Vec& x) const;
  Quaternion scalar(const Value& c) const;
  Quaternion basis(size_t i) const;  // 0..3 for 1,u,v,w
  Quaternion one() const { return basis(0); }
  Quaternion u() const { return basis(1); }
  Quaternion v() const { return basis(2); }
  Quaternion w() const { return basis(3); }

  Quaternion mul(const Quaternion& a, const Quaternion& b) const;
  Quaternion conj(const Quaternion& a) const;
  Value trd(const Quaternion& a) const;
  Value nrd(const Quaternion& a) const;
  std::optional<Quaternion> inverse(const Quaternion& a) const;

  /// [1,r] (+) s[1,r] on (1,u | v,w).
  QuadraticForm norm_form() const;
  /// <1> (+) s[1,r] on (1, v, w).
  QuadraticForm pure_norm_form() const;

  std::string to_string() const;

 private:
  QuaternionAlgebra(Value r, Value s);
  Value r_, s_;
  std::array<std::array<Vec, 4>, 4> table_;
};

Quaternion random_quaternion(const Quat& H, int height, std::mt19937_64& rng);

struct DivisionReport {
  VerdictKind kind = VerdictKind::unknown;  // yes: division
  Cert cert = Cert::none;
  std::shared_ptr<const AnisotropyCertificate> certificate;
  std::optional<Quaternion> zero_divisor;  // split
  std::optional<Quaternion> idempotent;    // split: e^2 = e, e != 0, 1
  int height = 0;
  std::string detail;
};
DivisionReport is_division(const Quat& H, int height);

struct SplitByFQ {
  bool split = false;                          // H split; otherwise H = Q
  std::optional<Quaternion> idempotent;        // when split
  std::optional<IsometryWitness> norm_isometry;  // n_H -> n_Q
};
/// H split over F_Q iff H is split or H = Q (Q must be certified division).
Verdict<SplitByFQ> split_by_FQ(const Quat& H, const Quat& Q, int height);

enum class BasisChangeMode { shift_u, rescale_v };

struct BasisChange {
  Quaternion u, v, w;
  Value r, s;
  bool verified = false;
  std::vector<std::string> report;
};
/// shift_u: u' = u + l v + m w; rescale_v: u' = u, v' = l v + m w.
BasisChange change_basis(const Quat& H, BasisChangeMode mode, const Value& l, const Value& m);

/// Checks u(1+u) = r, v^2 = s, uv = v(1+u), w = uv for a candidate basis.
bool is_quaternion_basis(const Quaternion& u, const Quaternion& v, const Value& r, const Value& s);

}  // namespace qfc2
