#include "qfc2/fields.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <mutex>
#include <set>

namespace qfc2 {

namespace {

// x^k + ... ; primitive for every k so that x generates the multiplicative group.
constexpr std::array<uint32_t, 17> kModuli = {
    0,       0x3,    0x7,    0xB,    0x13,   0x25,   0x43,   0x83,   0x11D,
    0x211,   0x409,  0x805,  0x1053, 0x201B, 0x4443, 0x8003, 0x1100B,
};

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::deque<std::unique_ptr<FieldDesc>>& registry() {
  static std::deque<std::unique_ptr<FieldDesc>> r;
  return r;
}

uint32_t clmul_reduce(uint32_t a, uint32_t b, int k, uint32_t modulus) {
  uint32_t r = 0;
  while (b) {
    if (b & 1u) r ^= a;
    b >>= 1;
    a <<= 1;
    if (a & (1u << k)) a ^= modulus;
  }
  return r;
}

void build_tables(FieldDesc& f) {
  const uint32_t n = 1u << f.k;
  f.log_table.assign(n, 0);
  f.exp_table.assign(2 * n, 0);
  if (f.k == 1) {
    f.exp_table[0] = 1;
    f.exp_table[1] = 1;
    f.exp_table[2] = 1;
    return;
  }
  uint32_t x = 1;
  for (uint32_t i = 0; i + 1 < n; ++i) {
    f.exp_table[i] = x;
    if (i > 0 && x == 1) throw std::logic_error("GF modulus is not primitive");
    f.log_table[x] = i;
    x = clmul_reduce(x, 2, f.k, f.modulus);
  }
  for (uint32_t i = n - 1; i < 2 * n; ++i) f.exp_table[i] = f.exp_table[i - (n - 1)];
}

inline uint32_t gmul(Field cf, uint32_t a, uint32_t b) {
  if (a == 0 || b == 0) return 0;
  if (cf->k == 1) return 1;
  return cf->exp_table[cf->log_table[a] + cf->log_table[b]];
}

inline uint32_t ginv(Field cf, uint32_t a) {
  if (a == 0) throw Error(Error::Kind::division_by_zero, "division by zero");
  if (cf->k == 1) return 1;
  const uint32_t order = (1u << cf->k) - 1;
  return cf->exp_table[(order - cf->log_table[a]) % order];
}

uint32_t gsqrt(Field cf, uint32_t a) {
  for (int i = 1; i < cf->k; ++i) a = gmul(cf, a, a);
  return a;
}

std::string gf_string(int k, uint32_t bits) {
  if (bits == 0) return "0";
  std::string out;
  for (int i = k - 1; i >= 0; --i) {
    if (!(bits & (1u << i))) continue;
    if (!out.empty()) out += "+";
    out += i == 0 ? "1" : (i == 1 ? "w" : "w^" + std::to_string(i));
  }
  return out;
}

}  // namespace

Field FieldDesc::constant_field() const noexcept {
  Field f = this;
  while (f->base) f = f->base;
  return f;
}

std::vector<std::string> FieldDesc::variables() const {
  std::vector<std::string> out;
  for (Field f = this; f->base; f = f->base) out.push_back(f->var);
  std::reverse(out.begin(), out.end());
  return out;
}

std::string FieldDesc::name() const {
  Field cf = constant_field();
  std::string s = cf->k == 1 ? "gf2" : cf->k == 2 ? "gf4" : "gf(2^" + std::to_string(cf->k) + ")";
  auto vars = variables();
  if (!vars.empty()) {
    s += "(";
    for (size_t i = 0; i < vars.size(); ++i) s += (i ? "," : "") + vars[i];
    s += ")";
  }
  return s;
}

uint32_t gf_modulus(int k) {
  if (k < 1 || k > 16) throw Error(Error::Kind::unsupported, "GF(2^k) requires 1 <= k <= 16");
  return kModuli[static_cast<size_t>(k)];
}

Field gf(int k) {
  const uint32_t modulus = gf_modulus(k);
  std::lock_guard<std::mutex> lock(registry_mutex());
  for (auto& f : registry())
    if (!f->base && f->k == k) return f.get();
  auto f = std::make_unique<FieldDesc>();
  f->k = k;
  f->modulus = modulus;
  build_tables(*f);
  registry().push_back(std::move(f));
  return registry().back().get();
}

Field rational(Field base, const std::string& var) {
  if (!base) throw Error(Error::Kind::precondition_failed, "null base field");
  if (base->depth >= 4) throw Error(Error::Kind::unsupported, "field towers are capped at depth 4");
  if (var.empty() || var == "w") throw Error(Error::Kind::parse_error, "invalid variable name '" + var + "'");
  for (const auto& v : base->variables())
    if (v == var) throw Error(Error::Kind::parse_error, "duplicate variable '" + var + "'");
  std::lock_guard<std::mutex> lock(registry_mutex());
  for (auto& f : registry())
    if (f->base == base && f->var == var) return f.get();
  auto f = std::make_unique<FieldDesc>();
  f->k = base->k;
  f->modulus = base->modulus;
  f->base = base;
  f->var = var;
  f->depth = base->depth + 1;
  registry().push_back(std::move(f));
  return registry().back().get();
}

// ---------------------------------------------------------------- multivariate polynomials

namespace mpoly {

bool divides(Mono a, Mono b) {
  for (int l = 0; l < 4; ++l)
    if (exponent(a, l) > exponent(b, l)) return false;
  return true;
}

MPoly constant(uint32_t c) { return c ? MPoly{Term{0, c}} : MPoly{}; }

bool is_one(const MPoly& a) { return a.size() == 1 && a[0].mono == 0 && a[0].coef == 1; }

MPoly add(const MPoly& a, const MPoly& b) {
  MPoly r;
  r.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].mono > b[j].mono)) {
      r.push_back(a[i++]);
    } else if (i == a.size() || b[j].mono > a[i].mono) {
      r.push_back(b[j++]);
    } else {
      const uint32_t c = a[i].coef ^ b[j].coef;
      if (c) r.push_back(Term{a[i].mono, c});
      ++i;
      ++j;
    }
  }
  return r;
}

MPoly scale(Field cf, const MPoly& a, uint32_t c, Mono m) {
  if (!c) return {};
  MPoly r;
  r.reserve(a.size());
  for (const auto& t : a) r.push_back(Term{t.mono + m, gmul(cf, t.coef, c)});
  return r;
}

MPoly mul(Field cf, const MPoly& a, const MPoly& b) {
  if (a.empty() || b.empty()) return {};
  if (a.size() == 1) return scale(cf, b, a[0].coef, a[0].mono);
  if (b.size() == 1) return scale(cf, a, b[0].coef, b[0].mono);
  MPoly prod;
  prod.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) prod.push_back(Term{x.mono + y.mono, gmul(cf, x.coef, y.coef)});
  std::sort(prod.begin(), prod.end(), [](const Term& x, const Term& y) { return x.mono > y.mono; });
  MPoly r;
  r.reserve(prod.size());
  for (size_t i = 0; i < prod.size();) {
    uint32_t c = 0;
    size_t j = i;
    for (; j < prod.size() && prod[j].mono == prod[i].mono; ++j) c ^= prod[j].coef;
    if (c) r.push_back(Term{prod[i].mono, c});
    i = j;
  }
  return r;
}

MPoly div_exact(Field cf, const MPoly& a, const MPoly& b) {
  if (b.empty()) throw Error(Error::Kind::division_by_zero, "polynomial division by zero");
  const uint32_t inv = ginv(cf, b[0].coef);
  MPoly r = a, q;
  while (!r.empty()) {
    if (!divides(b[0].mono, r[0].mono)) throw std::logic_error("inexact polynomial division");
    const Mono m = r[0].mono - b[0].mono;
    const uint32_t c = gmul(cf, r[0].coef, inv);
    q.push_back(Term{m, c});
    r = add(r, scale(cf, b, c, m));
  }
  return q;
}

int degree(const MPoly& a, int level) {
  int d = a.empty() ? -1 : 0;
  for (const auto& t : a) d = std::max(d, exponent(t.mono, level));
  return d;
}

int top_level(const MPoly& a) {
  Mono all = 0;
  for (const auto& t : a) all |= t.mono;
  for (int l = 3; l >= 0; --l)
    if (exponent(all, l)) return l;
  return -1;
}

namespace {

std::vector<MPoly> coeffs_in(const MPoly& a, int v) {
  std::vector<MPoly> c(static_cast<size_t>(std::max(degree(a, v), 0) + 1));
  for (const auto& t : a) {
    const int e = exponent(t.mono, v);
    c[static_cast<size_t>(e)].push_back(Term{t.mono - monomial(v, e), t.coef});
  }
  return c;
}

MPoly from_coeffs(const std::vector<MPoly>& c, int v) {
  MPoly r;
  for (size_t e = 0; e < c.size(); ++e) {
    MPoly shifted = c[e];
    for (auto& t : shifted) t.mono += monomial(v, static_cast<int>(e));
    r = add(r, shifted);
  }
  return r;
}

MPoly normalize(Field cf, const MPoly& a) {
  if (a.empty() || a[0].coef == 1) return a;
  return scale(cf, a, ginv(cf, a[0].coef));
}

MPoly content(Field cf, const MPoly& a, int v) {
  MPoly g;
  for (const auto& c : coeffs_in(a, v)) {
    if (c.empty()) continue;
    g = g.empty() ? normalize(cf, c) : gcd(cf, g, c);
    if (is_one(g)) break;
  }
  return g;
}

MPoly prem(Field cf, const MPoly& a, const MPoly& b, int v) {
  std::vector<MPoly> A = coeffs_in(a, v);
  const std::vector<MPoly> B = coeffs_in(b, v);
  const size_t m = B.size() - 1;
  const MPoly& lc = B[m];
  while (!A.empty() && A.size() - 1 >= m) {
    const size_t d = A.size() - 1;
    const MPoly lead = A[d];
    for (auto& c : A) c = mul(cf, c, lc);
    for (size_t j = 0; j <= m; ++j) A[j + d - m] = add(A[j + d - m], mul(cf, lead, B[j]));
    while (!A.empty() && A.back().empty()) A.pop_back();
  }
  return from_coeffs(A, v);
}

// Evaluation field for coprimality tests: GF(2^16) when it contains the constant
// field, otherwise the constant field itself.
struct EvalField {
  Field ef;
  std::vector<uint32_t> embed;  // images of the basis bits 1, w, w^2, ...
};

const EvalField& eval_field(Field cf) {
  static std::mutex m;
  static std::map<int, EvalField> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(cf->k);
  if (it != cache.end()) return it->second;
  EvalField e;
  if (16 % cf->k != 0) {
    e.ef = cf;
    for (int i = 0; i < cf->k; ++i) e.embed.push_back(1u << i);
  } else {
    e.ef = gf(16);
    const uint32_t order = 0xFFFFu;
    const uint32_t step = order / ((1u << cf->k) - 1);
    // find a root of the constant field modulus inside GF(2^16)
    uint32_t alpha = 0;
    for (uint32_t i = 0; i < (1u << cf->k) - 1 && !alpha; ++i) {
      const uint32_t cand = e.ef->exp_table[(static_cast<uint64_t>(i) * step) % order];
      uint32_t val = 0, pw = 1;
      for (int b = 0; b <= cf->k; ++b) {
        if (cf->modulus & (1u << b)) val ^= pw;
        pw = gmul(e.ef, pw, cand);
      }
      if (val == 0 && (cf->k == 1 || cand != 1)) alpha = cand;
    }
    if (cf->k == 1) alpha = 1;
    uint32_t pw = 1;
    for (int i = 0; i < cf->k; ++i) {
      e.embed.push_back(pw);
      pw = gmul(e.ef, pw, alpha);
    }
  }
  return cache.emplace(cf->k, std::move(e)).first->second;
}

uint32_t embed_coef(const EvalField& e, uint32_t c) {
  uint32_t r = 0;
  for (size_t i = 0; i < e.embed.size(); ++i)
    if (c & (1u << i)) r ^= e.embed[i];
  return r;
}

std::vector<uint32_t> evaluate_except(const EvalField& e, const MPoly& a, int v, const std::array<uint32_t, 4>& pt) {
  std::vector<uint32_t> out(static_cast<size_t>(degree(a, v) + 1), 0);
  for (const auto& t : a) {
    uint32_t c = embed_coef(e, t.coef);
    for (int l = 0; l < 4 && c; ++l) {
      if (l == v) continue;
      for (int j = exponent(t.mono, l); j > 0; --j) c = gmul(e.ef, c, pt[static_cast<size_t>(l)]);
    }
    out[static_cast<size_t>(exponent(t.mono, v))] ^= c;
  }
  return out;
}

int univariate_gcd_degree(Field ef, std::vector<uint32_t> a, std::vector<uint32_t> b) {
  auto trim = [](std::vector<uint32_t>& p) {
    while (!p.empty() && !p.back()) p.pop_back();
  };
  trim(a);
  trim(b);
  while (!b.empty()) {
    if (a.size() < b.size()) std::swap(a, b);
    const uint32_t inv = ginv(ef, b.back());
    while (a.size() >= b.size()) {
      const uint32_t c = gmul(ef, a.back(), inv);
      const size_t shift = a.size() - b.size();
      for (size_t j = 0; j < b.size(); ++j) a[shift + j] ^= gmul(ef, c, b[j]);
      trim(a);
      if (a.empty()) break;
    }
    std::swap(a, b);
  }
  return static_cast<int>(a.size()) - 1;
}

// True when a and b certainly share no factor of positive degree in v.
bool coprime_in(Field cf, const MPoly& a, const MPoly& b, int v) {
  const EvalField& e = eval_field(cf);
  static thread_local std::mt19937 rng(12345);
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::array<uint32_t, 4> pt{};
    for (auto& x : pt) x = static_cast<uint32_t>(rng() % (e.ef->size_finite() - 1)) + 1;
    auto A = evaluate_except(e, a, v, pt);
    auto B = evaluate_except(e, b, v, pt);
    if (A.back() == 0 || B.back() == 0) continue;
    if (univariate_gcd_degree(e.ef, A, B) == 0) return true;
  }
  return false;
}

}  // namespace

MPoly gcd(Field cf, const MPoly& a, const MPoly& b) {
  if (a.empty()) return normalize(cf, b);
  if (b.empty()) return normalize(cf, a);
  if (is_one(a) || is_one(b)) return constant(1);
  if (a == b) return normalize(cf, a);
  const int la = top_level(a), lb = top_level(b);
  const int v = std::max(la, lb);
  if (v < 0) return constant(1);
  if (la < v) return gcd(cf, a, content(cf, b, v));
  if (lb < v) return gcd(cf, content(cf, a, v), b);
  const MPoly ca = content(cf, a, v), cb = content(cf, b, v);
  if (coprime_in(cf, a, b, v)) return gcd(cf, ca, cb);
  MPoly pa = div_exact(cf, a, ca), pb = div_exact(cf, b, cb);
  const MPoly gc = gcd(cf, ca, cb);
  if (degree(pa, v) < degree(pb, v)) std::swap(pa, pb);
  while (!pb.empty() && degree(pb, v) > 0) {
    MPoly r = prem(cf, pa, pb, v);
    pa = std::move(pb);
    pb = r.empty() ? MPoly{} : div_exact(cf, r, content(cf, r, v));
  }
  if (!pb.empty()) return gc;
  return normalize(cf, mul(cf, gc, pa));
}

std::string to_string(Field cf, const MPoly& a, const std::vector<std::string>& vars) {
  if (a.empty()) return "0";
  std::string out;
  for (const auto& t : a) {
    std::string mono;
    for (int l = static_cast<int>(vars.size()) - 1; l >= 0; --l) {
      const int e = exponent(t.mono, l);
      if (!e) continue;
      if (!mono.empty()) mono += "*";
      mono += vars[static_cast<size_t>(l)];
      if (e > 1) mono += "^" + std::to_string(e);
    }
    std::string c = gf_string(cf->k, t.coef);
    std::string term;
    if (mono.empty()) term = c;
    else if (t.coef == 1) term = mono;
    else term = (c.find('+') != std::string::npos ? "(" + c + ")" : c) + "*" + mono;
    if (!out.empty()) out += "+";
    out += term;
  }
  return out;
}

}  // namespace mpoly

// ---------------------------------------------------------------- Value

Value Value::from_finite(Field f, uint32_t bits) {
  Value v;
  v.field_ = f;
  v.bits_ = bits & ((1u << f->k) - 1);
  return v;
}

Value Value::from_frac(Field f, MPoly num, MPoly den) {
  if (den.empty()) throw Error(Error::Kind::division_by_zero, "division by zero");
  if (f->is_finite()) {
    if (mpoly::top_level(num) >= 0 || mpoly::top_level(den) >= 0)
      throw Error(Error::Kind::field_mismatch, "polynomial value in a finite field");
    return from_finite(f, num.empty() ? 0 : gmul(f, num[0].coef, ginv(f, den[0].coef)));
  }
  Value v;
  v.field_ = f;
  if (num.empty()) return v;
  Field cf = f->constant_field();
  if (!mpoly::is_one(den)) {
    MPoly g = mpoly::gcd(cf, num, den);
    if (!mpoly::is_one(g)) {
      num = mpoly::div_exact(cf, num, g);
      den = mpoly::div_exact(cf, den, g);
    }
  }
  if (den[0].coef != 1) {
    const uint32_t inv = ginv(cf, den[0].coef);
    num = mpoly::scale(cf, num, inv);
    den = mpoly::scale(cf, den, inv);
  }
  v.rat_ = std::make_shared<const RatRep>(RatRep{std::move(num), std::move(den)});
  return v;
}

Value Value::zero(Field f) {
  Value v;
  v.field_ = f;
  return v;
}

Value Value::one(Field f) { return constant(f, 1); }

Value Value::constant(Field f, uint32_t bits) {
  bits &= (1u << f->k) - 1;
  if (f->is_finite()) return from_finite(f, bits);
  Value v;
  v.field_ = f;
  if (bits) v.rat_ = std::make_shared<const RatRep>(RatRep{mpoly::constant(bits), mpoly::constant(1)});
  return v;
}

Value Value::variable(Field f, int level) {
  if (level < 0 || level >= f->depth) throw Error(Error::Kind::precondition_failed, "variable level out of range");
  Value v;
  v.field_ = f;
  v.rat_ = std::make_shared<const RatRep>(RatRep{MPoly{Term{mpoly::monomial(level, 1), 1}}, mpoly::constant(1)});
  return v;
}

Value Value::variable(Field f, const std::string& name) {
  auto vars = f->variables();
  for (size_t i = 0; i < vars.size(); ++i)
    if (vars[i] == name) return variable(f, static_cast<int>(i));
  throw Error(Error::Kind::parse_error, "unknown variable '" + name + "'");
}

Value Value::lift(const Value& x, Field f) {
  if (x.field_ == f) return x;
  Field g = f;
  while (g && g != x.field_) g = g->base;
  if (!g) throw Error(Error::Kind::field_mismatch, "cannot lift " + x.field_->name() + " into " + f->name());
  if (x.is_zero()) return zero(f);
  if (x.field_->is_finite()) return constant(f, x.bits_);
  Value v = x;
  v.field_ = f;
  return v;
}

bool Value::is_zero() const noexcept {
  if (!field_) return true;
  return field_->is_finite() ? bits_ == 0 : rat_ == nullptr;
}

bool Value::is_one() const {
  if (field_->is_finite()) return bits_ == 1;
  return rat_ && mpoly::is_one(rat_->num) && mpoly::is_one(rat_->den);
}

bool Value::is_constant() const {
  if (field_->is_finite() || !rat_) return true;
  return mpoly::is_one(rat_->den) && rat_->num.size() == 1 && rat_->num[0].mono == 0;
}

uint32_t Value::constant_bits() const {
  if (field_->is_finite()) return bits_;
  if (!rat_) return 0;
  if (!is_constant()) throw Error(Error::Kind::precondition_failed, "value is not a constant");
  return rat_->num[0].coef;
}

static void check_same(const Value& a, const Value& b) {
  if (a.field() != b.field())
    throw Error(Error::Kind::field_mismatch, "field mismatch: " + (a.field() ? a.field()->name() : "?") + " vs " +
                                                  (b.field() ? b.field()->name() : "?"));
}

Value Value::operator+(const Value& o) const {
  check_same(*this, o);
  if (field_->is_finite()) return from_finite(field_, bits_ ^ o.bits_);
  if (!rat_) return o;
  if (!o.rat_) return *this;
  const RatRep& a = *rat_;
  const RatRep& b = *o.rat_;
  Field cf = field_->constant_field();
  if (a.den == b.den) {
    MPoly n = mpoly::add(a.num, b.num);
    if (n.empty()) return zero(field_);
    if (mpoly::is_one(a.den)) {
      Value v;
      v.field_ = field_;
      v.rat_ = std::make_shared<const RatRep>(RatRep{std::move(n), a.den});
      return v;
    }
    return from_frac(field_, std::move(n), a.den);
  }
  const MPoly g = mpoly::gcd(cf, a.den, b.den);
  const MPoly bd = mpoly::div_exact(cf, b.den, g);
  const MPoly ad = mpoly::div_exact(cf, a.den, g);
  MPoly num = mpoly::add(mpoly::mul(cf, a.num, bd), mpoly::mul(cf, b.num, ad));
  MPoly den = mpoly::mul(cf, a.den, bd);
  return from_frac(field_, std::move(num), std::move(den));
}

Value Value::operator*(const Value& o) const {
  check_same(*this, o);
  if (field_->is_finite()) return from_finite(field_, gmul(field_, bits_, o.bits_));
  if (!rat_ || !o.rat_) return zero(field_);
  if (rat_ == o.rat_ || *this == o) return square();
  const RatRep& a = *rat_;
  const RatRep& b = *o.rat_;
  Field cf = field_->constant_field();
  MPoly an = a.num, ad = a.den, bn = b.num, bd = b.den;
  if (!mpoly::is_one(bd)) {
    MPoly g = mpoly::gcd(cf, an, bd);
    if (!mpoly::is_one(g)) {
      an = mpoly::div_exact(cf, an, g);
      bd = mpoly::div_exact(cf, bd, g);
    }
  }
  if (!mpoly::is_one(ad)) {
    MPoly g = mpoly::gcd(cf, bn, ad);
    if (!mpoly::is_one(g)) {
      bn = mpoly::div_exact(cf, bn, g);
      ad = mpoly::div_exact(cf, ad, g);
    }
  }
  Value v;
  v.field_ = field_;
  v.rat_ = std::make_shared<const RatRep>(RatRep{mpoly::mul(cf, an, bn), mpoly::mul(cf, ad, bd)});
  return v;
}

static MPoly frobenius(Field cf, const MPoly& a) {
  MPoly r;
  r.reserve(a.size());
  for (const auto& t : a) r.push_back(Term{t.mono + t.mono, gmul(cf, t.coef, t.coef)});
  return r;
}

Value Value::square() const {
  if (field_->is_finite()) return from_finite(field_, gmul(field_, bits_, bits_));
  if (!rat_) return *this;
  Field cf = field_->constant_field();
  Value v;
  v.field_ = field_;
  v.rat_ = std::make_shared<const RatRep>(RatRep{frobenius(cf, rat_->num), frobenius(cf, rat_->den)});
  return v;
}

Value Value::inv() const {
  if (is_zero()) throw Error(Error::Kind::division_by_zero, "division by zero");
  if (field_->is_finite()) return from_finite(field_, ginv(field_, bits_));
  Field cf = field_->constant_field();
  MPoly num = rat_->den, den = rat_->num;
  if (den[0].coef != 1) {
    const uint32_t inv = ginv(cf, den[0].coef);
    num = mpoly::scale(cf, num, inv);
    den = mpoly::scale(cf, den, inv);
  }
  Value v;
  v.field_ = field_;
  v.rat_ = std::make_shared<const RatRep>(RatRep{std::move(num), std::move(den)});
  return v;
}

Value Value::operator/(const Value& o) const {
  check_same(*this, o);
  return *this * o.inv();
}

Value Value::pow(uint64_t e) const {
  Value result = one(field_), base = *this;
  while (e) {
    if (e & 1u) result = result * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return result;
}

bool Value::operator==(const Value& o) const {
  if (field_ != o.field_) return false;
  if (field_->is_finite()) return bits_ == o.bits_;
  if (!rat_ || !o.rat_) return !rat_ && !o.rat_;
  if (rat_ == o.rat_) return true;
  return rat_->num == o.rat_->num && rat_->den == o.rat_->den;
}

static int compare_mpoly(const MPoly& a, const MPoly& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].mono != b[i].mono) return a[i].mono < b[i].mono ? -1 : 1;
    if (a[i].coef != b[i].coef) return a[i].coef < b[i].coef ? -1 : 1;
  }
  return 0;
}

int Value::compare(const Value& o) const {
  check_same(*this, o);
  if (field_->is_finite()) return bits_ == o.bits_ ? 0 : (bits_ < o.bits_ ? -1 : 1);
  if (!rat_ || !o.rat_) return (rat_ ? 1 : 0) - (o.rat_ ? 1 : 0);
  int c = compare_mpoly(rat_->den, o.rat_->den);
  if (c) return c;
  return compare_mpoly(rat_->num, o.rat_->num);
}

int Value::degree_in(int level) const {
  if (field_->is_finite() || !rat_) return 0;
  return mpoly::degree(rat_->num, level) - mpoly::degree(rat_->den, level);
}

int Value::top_degree() const { return field_->is_finite() ? 0 : degree_in(field_->depth - 1); }

std::string Value::to_string() const {
  if (!field_) return "<null>";
  if (field_->is_finite()) return gf_string(field_->k, bits_);
  if (!rat_) return "0";
  Field cf = field_->constant_field();
  const auto vars = field_->variables();
  std::string n = mpoly::to_string(cf, rat_->num, vars);
  if (mpoly::is_one(rat_->den)) return n;
  std::string d = mpoly::to_string(cf, rat_->den, vars);
  if (n.find('+') != std::string::npos) n = "(" + n + ")";
  if (d.find_first_of("+*") != std::string::npos) d = "(" + d + ")";
  return n + "/" + d;
}

std::string to_string(const Value& v) { return v.to_string(); }

// ---------------------------------------------------------------- square roots

static std::optional<MPoly> mpoly_sqrt(Field cf, const MPoly& p) {
  MPoly r;
  r.reserve(p.size());
  for (const auto& t : p) {
    for (int l = 0; l < 4; ++l)
      if (mpoly::exponent(t.mono, l) % 2) return std::nullopt;
    r.push_back(Term{t.mono >> 1, gsqrt(cf, t.coef)});
  }
  return r;
}

std::optional<Value> sqrt_if_square(const Value& x) {
  Field f = x.field();
  if (f->is_finite()) return Value::from_finite(f, gsqrt(f, x.bits()));
  if (x.is_zero()) return x;
  Field cf = f->constant_field();
  auto n = mpoly_sqrt(cf, x.rat()->num);
  if (!n) return std::nullopt;
  auto d = mpoly_sqrt(cf, x.rat()->den);
  if (!d) return std::nullopt;
  return Value::from_frac(f, *n, *d);
}

// ---------------------------------------------------------------- Artin-Schreier

namespace {

// Cheap necessary conditions for c in {x^2 + x}.
bool as_prefilter(const Value& c) {
  Field f = c.field();
  if (f->is_finite() || c.is_zero()) return true;
  if (!mpoly_sqrt(f->constant_field(), c.rat()->den)) return false;
  for (int l = 0; l < f->depth; ++l) {
    const int d = c.degree_in(l);
    if (d > 0 && d % 2) return false;
  }
  return true;
}

// Solves a GF(2) linear system given as rows of bits; last column is the rhs.
std::optional<std::vector<uint8_t>> solve_gf2(std::vector<std::vector<uint64_t>>& rows, size_t unknowns) {
  const size_t words = (unknowns + 1 + 63) / 64;
  auto get = [&](const std::vector<uint64_t>& row, size_t i) { return (row[i / 64] >> (i % 64)) & 1u; };
  std::vector<size_t> pivot_col;
  size_t rank = 0;
  for (size_t col = 0; col < unknowns && rank < rows.size(); ++col) {
    size_t p = rank;
    while (p < rows.size() && !get(rows[p], col)) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[rank]);
    for (size_t r = 0; r < rows.size(); ++r) {
      if (r != rank && get(rows[r], col))
        for (size_t w = 0; w < words; ++w) rows[r][w] ^= rows[rank][w];
    }
    pivot_col.push_back(col);
    ++rank;
  }
  for (size_t r = rank; r < rows.size(); ++r)
    if (get(rows[r], unknowns)) return std::nullopt;
  std::vector<uint8_t> sol(unknowns, 0);
  for (size_t r = 0; r < rank; ++r) sol[pivot_col[r]] = static_cast<uint8_t>(get(rows[r], unknowns));
  return sol;
}

}  // namespace

uint32_t absolute_trace(const Value& c) {
  Field f = c.field();
  if (!f->is_finite()) {
    if (!c.is_constant()) throw Error(Error::Kind::precondition_failed, "trace of a non-constant value");
    return absolute_trace(Value::from_finite(f->constant_field(), c.constant_bits()));
  }
  Value t = c, s = c;
  for (int i = 1; i < f->k; ++i) {
    s = s * s;
    t = t + s;
  }
  return t.bits();
}

std::optional<Value> artin_schreier_solve(const Value& c) {
  Field f = c.field();
  if (c.is_zero()) return Value::zero(f);
  if (!as_prefilter(c)) return std::nullopt;
  Field cf = f->constant_field();
  const int k = cf->k;
  const int nvars = f->depth;
  const MPoly P = f->is_finite() ? mpoly::constant(c.bits()) : c.rat()->num;
  const MPoly D = f->is_finite() ? mpoly::constant(1) : c.rat()->den;
  const MPoly T = mpoly::mul(cf, P, D);
  // x = A/D with A polynomial and A^2 + A D = P D.
  std::array<int, 4> bound{0, 0, 0, 0};
  for (int v = 0; v < nvars; ++v)
    bound[static_cast<size_t>(v)] = std::max(mpoly::degree(D, v), (mpoly::degree(T, v) + 1) / 2);
  std::vector<Mono> box{0};
  for (int v = 0; v < nvars; ++v) {
    std::vector<Mono> next;
    for (Mono m : box)
      for (int e = 0; e <= bound[static_cast<size_t>(v)]; ++e) next.push_back(m + mpoly::monomial(v, e));
    box = std::move(next);
  }
  const size_t unknowns = box.size() * static_cast<size_t>(k);
  std::map<Mono, size_t> row_of;
  std::vector<MPoly> columns;
  columns.reserve(unknowns);
  for (Mono m : box) {
    for (int j = 0; j < k; ++j) {
      const uint32_t beta = 1u << j;
      MPoly col = mpoly::add(MPoly{Term{m + m, gmul(cf, beta, beta)}}, mpoly::scale(cf, D, beta, m));
      for (const auto& t : col) row_of.emplace(t.mono, 0);
      columns.push_back(std::move(col));
    }
  }
  for (const auto& t : T)
    if (!row_of.count(t.mono)) return std::nullopt;
  size_t idx = 0;
  for (auto& [mono, r] : row_of) r = idx++;
  const size_t nrows = row_of.size() * static_cast<size_t>(k);
  const size_t words = (unknowns + 1 + 63) / 64;
  std::vector<std::vector<uint64_t>> rows(nrows, std::vector<uint64_t>(words, 0));
  auto set_bits = [&](const MPoly& p, size_t col) {
    for (const auto& t : p)
      for (int b = 0; b < k; ++b)
        if (t.coef & (1u << b))
          rows[row_of[t.mono] * static_cast<size_t>(k) + static_cast<size_t>(b)][col / 64] |= (1ull << (col % 64));
  };
  for (size_t u = 0; u < unknowns; ++u) set_bits(columns[u], u);
  set_bits(T, unknowns);
  auto sol = solve_gf2(rows, unknowns);
  if (!sol) return std::nullopt;
  MPoly A;
  for (size_t i = 0; i < box.size(); ++i) {
    uint32_t coeff = 0;
    for (int j = 0; j < k; ++j)
      if ((*sol)[i * static_cast<size_t>(k) + static_cast<size_t>(j)]) coeff |= 1u << j;
    if (coeff) A.push_back(Term{box[i], coeff});
  }
  std::sort(A.begin(), A.end(), [](const Term& a, const Term& b) { return a.mono > b.mono; });
  Value x = f->is_finite() ? Value::from_finite(f, A.empty() ? 0 : A[0].coef) : Value::from_frac(f, A, D);
  if (x * x + x != c) throw std::logic_error("artin_schreier_solve produced a wrong solution");
  return x;
}

static Value reduce_as(const Value& c) {
  Field f = c.field();
  if (artin_schreier_solve(c)) return Value::zero(f);
  if (f->is_finite()) {
    for (uint32_t b = 1; b < f->size_finite(); ++b) {
      Value cand = Value::from_finite(f, b);
      if (absolute_trace(cand)) return cand;
    }
    return c;
  }
  const int top = f->depth - 1;
  const MPoly& den = c.rat()->den;
  if (mpoly::degree(den, top) > 0) return c;
  // c = sum_i (p_i / den) t^i with coefficients in the base field
  std::vector<MPoly> parts(static_cast<size_t>(mpoly::degree(c.rat()->num, top) + 1));
  for (const auto& t : c.rat()->num) {
    const int e = mpoly::exponent(t.mono, top);
    parts[static_cast<size_t>(e)].push_back(Term{t.mono - mpoly::monomial(top, e), t.coef});
  }
  std::vector<Value> coef;
  for (const auto& p : parts) {
    if (p.empty()) coef.push_back(Value::zero(f->base));
    else if (f->base->is_finite()) coef.push_back(Value::from_finite(f->base, p[0].coef));
    else coef.push_back(Value::from_frac(f->base, p, den));
  }
  for (size_t i = coef.size(); i-- > 1;) {
    if (i % 2 || coef[i].is_zero()) continue;
    auto s = sqrt_if_square(coef[i]);
    if (!s) continue;
    coef[i / 2] = coef[i / 2] + *s;
    coef[i] = Value::zero(f->base);
  }
  coef[0] = reduce_as(coef[0]);
  const Value t = Value::variable(f, top);
  Value out = Value::zero(f);
  for (size_t i = coef.size(); i-- > 0;) out = out * t + Value::lift(coef[i], f);
  return out;
}

bool ArtinSchreierClass::is_trivial() const { return artin_schreier_solve(reduced_).has_value(); }

bool ArtinSchreierClass::operator==(const ArtinSchreierClass& o) const {
  if (reduced_ == o.reduced_) return true;
  return artin_schreier_solve(reduced_ + o.reduced_).has_value();
}

ArtinSchreierClass ArtinSchreierClass::operator+(const ArtinSchreierClass& o) const {
  return as_class(representative_ + o.representative_);
}

ArtinSchreierClass as_class(const Value& c) { return ArtinSchreierClass(c, reduce_as(c)); }

// ---------------------------------------------------------------- enumeration

static void enumerate_level(Field f, int level, std::vector<Value>& out, std::set<Value>& seen);

std::vector<Value> enumerate(Field f, int height) {
  if (height < 0) height = 0;
  std::vector<Value> out;
  if (f->is_finite()) {
    for (uint32_t b = 0; b < f->size_finite(); ++b) out.push_back(Value::from_finite(f, b));
    return out;
  }
  std::set<Value> seen;
  for (int l = 0; l <= height; ++l) enumerate_level(f, l, out, seen);
  return out;
}

static void enumerate_level(Field f, int level, std::vector<Value>& out, std::set<Value>& seen) {
  std::vector<Value> coeffs;
  for (const auto& c : enumerate(f->base, level)) coeffs.push_back(Value::lift(c, f));
  const Value t = Value::variable(f, f->depth - 1);
  const size_t nc = coeffs.size();
  const size_t len = static_cast<size_t>(level) + 1;
  std::vector<size_t> ni(len, 0);
  std::vector<std::pair<Value, int>> nums;  // value, degree
  for (;;) {
    Value p = Value::zero(f);
    int d = -1;
    for (size_t i = len; i-- > 0;) {
      p = p * t + coeffs[ni[i]];
      if (d < 0 && ni[i]) d = static_cast<int>(i);
    }
    nums.emplace_back(p, d);
    size_t pos = 0;
    while (pos < len && ++ni[pos] == nc) ni[pos++] = 0;
    if (pos == len) break;
  }
  std::vector<Value> dens;
  for (int d = 0; d <= level; ++d)
    for (const auto& [p, deg] : nums)
      if (deg < d || (d == 0 && deg < 0)) dens.push_back(p + t.pow(static_cast<uint64_t>(d)));
  for (const auto& q : dens)
    for (const auto& [p, deg] : nums) {
      Value v = p / q;
      if (seen.insert(v).second) out.push_back(v);
    }
}

uint64_t polynomial_count(Field f, int height) {
  uint64_t box = 1;
  for (int i = 0; i < f->depth; ++i) box *= static_cast<uint64_t>(height + 1);
  const uint64_t bits = box * static_cast<uint64_t>(f->k);
  if (bits >= 63) return UINT64_MAX;
  return (1ull << bits);
}

static std::vector<Mono> monomial_box(int depth, int height) {
  std::vector<Mono> box{0};
  for (int v = 0; v < depth; ++v) {
    std::vector<Mono> next;
    for (Mono m : box)
      for (int e = 0; e <= height; ++e) next.push_back(m + mpoly::monomial(v, e));
    box = std::move(next);
  }
  std::sort(box.begin(), box.end(), std::greater<>());
  return box;
}

std::vector<Value> enumerate_polynomials(Field f, int height) {
  if (height < 0) height = 0;
  if (f->is_finite()) return enumerate(f, 0);
  if (polynomial_count(f, height) > (1ull << 22))
    throw Error(Error::Kind::unsupported, "polynomial enumeration too large");
  const uint32_t q = f->size_finite();
  std::vector<Value> out;
  std::set<Value> seen;
  for (int l = 0; l <= height; ++l) {
    const std::vector<Mono> box = monomial_box(f->depth, l);
    std::vector<uint32_t> c(box.size(), 0);
    for (;;) {
      MPoly p;
      for (size_t i = 0; i < box.size(); ++i)
        if (c[i]) p.push_back(Term{box[i], c[i]});
      Value v = Value::from_frac(f, p, mpoly::constant(1));
      if (seen.insert(v).second) out.push_back(v);
      size_t pos = c.size();
      while (pos-- > 0) {
        if (++c[pos] < q) break;
        c[pos] = 0;
      }
      if (pos == static_cast<size_t>(-1)) break;
    }
  }
  return out;
}

Value random_polynomial(Field f, int height, std::mt19937_64& rng) {
  if (f->is_finite()) return Value::from_finite(f, static_cast<uint32_t>(rng() % f->size_finite()));
  MPoly p;
  for (Mono m : monomial_box(f->depth, height)) {
    const uint32_t c = static_cast<uint32_t>(rng() % f->size_finite());
    if (c) p.push_back(Term{m, c});
  }
  return Value::from_frac(f, p, mpoly::constant(1));
}

Value random_value(Field f, int height, std::mt19937_64& rng) {
  Value num = random_polynomial(f, height, rng);
  if (f->is_finite() || rng() % 2 == 0) return num;
  Value den;
  do {
    den = random_polynomial(f, height, rng);
  } while (den.is_zero());
  return num / den;
}

Value random_nonzero(Field f, int height, std::mt19937_64& rng) {
  Value v;
  do {
    v = random_value(f, height, rng);
  } while (v.is_zero());
  return v;
}

}  // namespace qfc2
