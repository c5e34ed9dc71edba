#pragma once

// Exact arithmetic over GF(2^k) and iterated rational function fields
// GF(2^k)(t1)...(tn), n <= 4.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfc2 {

class Error : public std::runtime_error {
 public:
  enum class Kind {
    division_by_zero,
    field_mismatch,
    precondition_failed,
    degenerate_input,
    not_nonsingular,
    unsupported,
    parse_error,
    criteria_disagree,
  };
  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct FieldDesc;
using Field = const FieldDesc*;

/// Interned field descriptor. Two descriptors describe the same field iff
/// the pointers are equal.
struct FieldDesc {
  int k = 1;                 // GF(2^k) constant field
  uint32_t modulus = 0;      // irreducible polynomial of GF(2^k) over GF(2)
  Field base = nullptr;      // null for the finite field itself
  std::string var;           // variable adjoined over base
  int depth = 0;             // number of adjoined variables

  bool is_finite() const noexcept { return base == nullptr; }
  Field constant_field() const noexcept;
  std::vector<std::string> variables() const;
  std::string name() const;
  uint32_t size_finite() const noexcept { return 1u << k; }

  // log/exp tables for the constant field
  std::vector<uint32_t> log_table;
  std::vector<uint32_t> exp_table;
};

/// GF(2^k), 1 <= k <= 16, with the shipped irreducible polynomial.
Field gf(int k);
/// base(var). Nesting depth is capped at 4.
Field rational(Field base, const std::string& var);
/// The published modulus for GF(2^k).
uint32_t gf_modulus(int k);

/// Monomial in up to four variables, 16 bits per exponent, level 0 in the low bits.
/// Integer order is lexicographic with the top variable most significant.
using Mono = uint64_t;
struct Term {
  Mono mono;
  uint32_t coef;  // nonzero element of the constant field
  bool operator==(const Term& o) const = default;
};
/// Sparse polynomial over GF(2^k), terms sorted by decreasing monomial.
using MPoly = std::vector<Term>;

struct RatRep {
  MPoly num;  // nonzero
  MPoly den;  // leading coefficient 1, coprime to num
};

/// An element of a field from `gf` / `rational`. Immutable; cheap to copy.
class Value {
 public:
  Value() = default;
  static Value zero(Field f);
  static Value one(Field f);
  /// Element of the constant field given by its bit pattern, lifted to f.
  static Value constant(Field f, uint32_t bits);
  /// The variable adjoined at level `level` (0-based from the bottom), lifted to f.
  static Value variable(Field f, int level);
  static Value variable(Field f, const std::string& name);
  /// Embed a value of a subfield of the tower into f.
  static Value lift(const Value& x, Field f);

  Field field() const noexcept { return field_; }
  bool is_zero() const noexcept;
  bool is_one() const;
  /// True iff the value lies in the constant field GF(2^k).
  bool is_constant() const;
  uint32_t constant_bits() const;  // requires is_constant()

  // finite-field payload
  uint32_t bits() const noexcept { return bits_; }
  // rational payload (null means zero)
  const RatRep* rat() const noexcept { return rat_.get(); }

  Value operator+(const Value& o) const;
  Value operator-(const Value& o) const { return *this + o; }
  Value operator*(const Value& o) const;
  Value operator/(const Value& o) const;
  Value& operator+=(const Value& o) { return *this = *this + o; }
  Value& operator*=(const Value& o) { return *this = *this * o; }
  Value inv() const;
  Value square() const;
  Value pow(uint64_t e) const;

  bool operator==(const Value& o) const;
  bool operator!=(const Value& o) const { return !(*this == o); }
  /// Total order on normalized representations (deterministic sorting).
  int compare(const Value& o) const;
  bool operator<(const Value& o) const { return compare(o) < 0; }

  std::string to_string() const;

  /// Degree of numerator minus degree of denominator in the top variable.
  int top_degree() const;
  /// Same, in the variable at `level`.
  int degree_in(int level) const;

  static Value from_finite(Field f, uint32_t bits);
  static Value from_frac(Field f, MPoly num, MPoly den);  // normalizes

 private:
  Field field_ = nullptr;
  uint32_t bits_ = 0;
  std::shared_ptr<const RatRep> rat_;
};

std::string to_string(const Value& v);

// ---- multivariate polynomials over GF(2^k)

namespace mpoly {
inline int exponent(Mono m, int level) { return static_cast<int>((m >> (16 * level)) & 0xFFFFu); }
inline Mono monomial(int level, int e) { return static_cast<Mono>(e) << (16 * level); }
bool divides(Mono a, Mono b);  // a | b
MPoly constant(uint32_t c);
MPoly add(const MPoly& a, const MPoly& b);
MPoly mul(Field cf, const MPoly& a, const MPoly& b);
MPoly scale(Field cf, const MPoly& a, uint32_t c, Mono m = 0);
MPoly div_exact(Field cf, const MPoly& a, const MPoly& b);  // throws if b does not divide a
MPoly gcd(Field cf, const MPoly& a, const MPoly& b);        // leading coefficient 1
int degree(const MPoly& a, int level);
int top_level(const MPoly& a);  // -1 for constants
bool is_one(const MPoly& a);
std::string to_string(Field cf, const MPoly& a, const std::vector<std::string>& vars);
}  // namespace mpoly

// ---- characteristic-2 solvers

/// Unique square root when it exists (squaring is injective in characteristic 2).
std::optional<Value> sqrt_if_square(const Value& x);

/// A solution of x^2 + x = c, or nullopt when c is not in the image of x -> x^2 + x.
/// Exact over every supported field.
std::optional<Value> artin_schreier_solve(const Value& c);

/// Absolute trace GF(2^k) -> GF(2) of a constant-field value.
uint32_t absolute_trace(const Value& c);

/// A coset of the additive subgroup {x^2 + x}.
class ArtinSchreierClass {
 public:
  ArtinSchreierClass() = default;
  ArtinSchreierClass(Value representative, Value reduced)
      : representative_(std::move(representative)), reduced_(std::move(reduced)) {}
  const Value& representative() const { return representative_; }
  /// Deterministic reduced representative. Canonical over finite fields; over
  /// function fields equality is decided by `operator==`.
  const Value& reduced() const { return reduced_; }
  bool is_trivial() const;
  bool operator==(const ArtinSchreierClass& o) const;
  bool operator!=(const ArtinSchreierClass& o) const { return !(*this == o); }
  ArtinSchreierClass operator+(const ArtinSchreierClass& o) const;

 private:
  Value representative_;
  Value reduced_;
};

ArtinSchreierClass as_class(const Value& c);

// ---- enumeration and sampling

/// All values of height <= h: for rational fields p/q with deg p, deg q <= h in the
/// top variable and coefficients of height <= h. Prefix-stable in h.
std::vector<Value> enumerate(Field f, int height);
/// Polynomials in all variables of the tower with degree <= h in each variable,
/// ordered by height level, then by encoding. Prefix-stable in h.
std::vector<Value> enumerate_polynomials(Field f, int height);
/// Number of polynomials enumerate_polynomials returns at height h.
uint64_t polynomial_count(Field f, int height);

/// Random value with numerator/denominator degrees <= h (per variable).
Value random_value(Field f, int height, std::mt19937_64& rng);
Value random_nonzero(Field f, int height, std::mt19937_64& rng);
Value random_polynomial(Field f, int height, std::mt19937_64& rng);

}  // namespace qfc2
