#include "qfc2/quaternions.hpp"

#include <map>

namespace qfc2 {

namespace {

// Normal form of a word in u, v on the basis (1, u, v, uv), by rewriting
// uu -> u + r, vv -> s, vu -> uv + v.
Vec normalize_word(const std::string& word, const Value& r, const Value& s) {
  Field f = r.field();
  for (size_t i = 0; i + 1 < word.size(); ++i) {
    const std::string pre = word.substr(0, i), post = word.substr(i + 2);
    const std::string pair = word.substr(i, 2);
    if (pair == "uu") return add(normalize_word(pre + "u" + post, r, s), scale(normalize_word(pre + post, r, s), r));
    if (pair == "vv") return scale(normalize_word(pre + post, r, s), s);
    if (pair == "vu") return add(normalize_word(pre + "uv" + post, r, s), normalize_word(pre + "v" + post, r, s));
  }
  static const std::map<std::string, size_t> index = {{"", 0}, {"u", 1}, {"v", 2}, {"uv", 3}};
  return unit_vec(f, 4, index.at(word));
}

const std::array<std::string, 4> kWords = {"", "u", "v", "uv"};
const std::array<std::string, 4> kNames = {"1", "u", "v", "w"};

void same_algebra(const Quaternion& a, const Quaternion& b) {
  if (a.alg != b.alg) throw Error(Error::Kind::field_mismatch, "quaternions from different algebras");
}

}  // namespace

QuaternionAlgebra::QuaternionAlgebra(Value r, Value s) : r_(std::move(r)), s_(std::move(s)) {
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) table_[i][j] = normalize_word(kWords[i] + kWords[j], r_, s_);
}

Quat QuaternionAlgebra::make(const Value& r, const Value& s) {
  if (r.field() != s.field()) throw Error(Error::Kind::field_mismatch, "[r,s) over different fields");
  if (s.is_zero()) throw Error(Error::Kind::precondition_failed, "[r,s) needs s != 0");
  Quat H(new QuaternionAlgebra(r, s));
  // associativity on all basis triples
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j)
      for (size_t k = 0; k < 4; ++k) {
        const Quaternion a = H->basis(i), b = H->basis(j), c = H->basis(k);
        if ((a * b) * c != a * (b * c)) throw std::logic_error("quaternion table is not associative");
      }
  // x conj(x) = n(x) 1, checked on the points e_i and e_i + e_j that determine a quadratic map
  const QuadraticForm n = H->norm_form();
  Field f = r.field();
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = i; j < 4; ++j) {
      Vec x = unit_vec(f, 4, i);
      if (j != i) x[j] = Value::one(f);
      const Quaternion q = H->element(x);
      if (q * H->conj(q) != H->scalar(n(x))) throw std::logic_error("norm form self-check failed");
    }
  return H;
}

Quaternion QuaternionAlgebra::element(const Vec& x) const {
  if (x.size() != 4) throw Error(Error::Kind::precondition_failed, "quaternion needs 4 coordinates");
  return Quaternion{shared_from_this(), x};
}

Quaternion QuaternionAlgebra::scalar(const Value& c) const {
  Vec x = zero_vec(field(), 4);
  x[0] = c;
  return element(x);
}

Quaternion QuaternionAlgebra::basis(size_t i) const { return element(unit_vec(field(), 4, i)); }

Quaternion QuaternionAlgebra::mul(const Quaternion& a, const Quaternion& b) const {
  same_algebra(a, b);
  Vec out = zero_vec(field(), 4);
  for (size_t i = 0; i < 4; ++i) {
    if (a.x[i].is_zero()) continue;
    for (size_t j = 0; j < 4; ++j) {
      if (b.x[j].is_zero()) continue;
      out = add(out, scale(table_[i][j], a.x[i] * b.x[j]));
    }
  }
  return element(out);
}

Value QuaternionAlgebra::trd(const Quaternion& a) const { return a.x[1]; }

Quaternion QuaternionAlgebra::conj(const Quaternion& a) const { return a + scalar(trd(a)); }

Value QuaternionAlgebra::nrd(const Quaternion& a) const { return norm_form()(a.x); }

std::optional<Quaternion> QuaternionAlgebra::inverse(const Quaternion& a) const {
  const Value n = nrd(a);
  if (n.is_zero()) return std::nullopt;
  return conj(a).scaled(n.inv());
}

QuadraticForm QuaternionAlgebra::norm_form() const {
  const QuadraticForm b = QuadraticForm::block(Value::one(field()), r_);
  return b.orth(b.scaled(s_));
}

QuadraticForm QuaternionAlgebra::pure_norm_form() const {
  return QuadraticForm::diagonal(field(), {Value::one(field())})
      .orth(QuadraticForm::block(Value::one(field()), r_).scaled(s_));
}

std::string QuaternionAlgebra::to_string() const {
  return "[" + r_.to_string() + "," + s_.to_string() + ") over " + field()->name();
}

Quaternion Quaternion::operator+(const Quaternion& o) const {
  same_algebra(*this, o);
  return Quaternion{alg, add(x, o.x)};
}

Quaternion Quaternion::operator*(const Quaternion& o) const { return alg->mul(*this, o); }

Quaternion Quaternion::scaled(const Value& c) const { return Quaternion{alg, scale(x, c)}; }

bool Quaternion::operator==(const Quaternion& o) const { return alg == o.alg && x == o.x; }

bool Quaternion::is_zero() const { return qfc2::is_zero(x); }

std::string Quaternion::to_string() const {
  std::string out;
  for (size_t i = 0; i < 4; ++i) {
    if (x[i].is_zero()) continue;
    std::string c = x[i].to_string();
    std::string term;
    if (i == 0) term = c;
    else if (x[i].is_one()) term = kNames[i];
    else term = (c.find_first_of("+/") != std::string::npos ? "(" + c + ")" : c) + "*" + kNames[i];
    out += (out.empty() ? "" : "+") + term;
  }
  return out.empty() ? "0" : out;
}

Quaternion random_quaternion(const Quat& H, int height, std::mt19937_64& rng) {
  Vec x(4);
  for (auto& c : x) c = random_value(H->field(), height, rng);
  return H->element(x);
}

namespace {

std::optional<Quaternion> idempotent_from_zero_divisor(const Quat& H, const Quaternion& z) {
  // z^2 = Trd(z) z when Nrd(z) = 0
  auto from = [&](const Quaternion& y) -> std::optional<Quaternion> {
    const Value t = H->trd(y);
    if (t.is_zero() || y.is_zero()) return std::nullopt;
    return y.scaled(t.inv());
  };
  if (auto e = from(z)) return e;
  for (size_t i = 0; i < 4; ++i)
    if (auto e = from(z * H->basis(i))) return e;
  return std::nullopt;
}

}  // namespace

DivisionReport is_division(const Quat& H, int height) {
  DivisionReport rep;
  rep.height = height;
  // [r,s) with r = c^2 + c: e = u + c is idempotent
  if (auto c = artin_schreier_solve(H->r())) {
    const Quaternion e = H->u() + H->scalar(*c);
    rep.kind = VerdictKind::no;
    rep.idempotent = e;
    rep.zero_divisor = e;
    rep.detail = "r lies in the Artin-Schreier image";
    if (e * e != e || !H->nrd(e).is_zero()) throw std::logic_error("idempotent check failed");
    return rep;
  }
  auto iso = isotropic_vector(H->norm_form(), height);
  if (iso.is_yes()) {
    const Quaternion z = H->element(*iso.witness);
    rep.kind = VerdictKind::no;
    rep.zero_divisor = z;
    rep.idempotent = idempotent_from_zero_divisor(H, z);
    if (!rep.idempotent || *rep.idempotent * *rep.idempotent != *rep.idempotent)
      throw std::logic_error("idempotent construction failed");
    rep.detail = "norm form is isotropic";
    return rep;
  }
  if (iso.is_no()) {
    rep.kind = VerdictKind::yes;
    rep.cert = iso.cert;
    rep.certificate = iso.anisotropy;
    rep.detail = "norm form is anisotropic";
    return rep;
  }
  rep.kind = VerdictKind::unknown;
  rep.detail = iso.detail;
  return rep;
}

Verdict<SplitByFQ> split_by_FQ(const Quat& H, const Quat& Q, int height) {
  using V = Verdict<SplitByFQ>;
  if (H->field() != Q->field()) throw Error(Error::Kind::field_mismatch, "algebras over different fields");
  auto dq = is_division(Q, height);
  if (dq.kind == VerdictKind::no) throw Error(Error::Kind::precondition_failed, "Q is split");
  if (dq.kind == VerdictKind::unknown) return V::unknown(height, "division of Q not settled");
  auto dh = is_division(H, height);
  if (dh.kind == VerdictKind::no) {
    SplitByFQ s;
    s.split = true;
    s.idempotent = dh.idempotent;
    return V::yes(s, "H is split");
  }
  auto iso = is_isometric(H->norm_form(), Q->norm_form(), height);
  if (iso.is_yes()) {
    SplitByFQ s;
    s.norm_isometry = *iso.witness;
    return V::yes(s, "norm forms are isometric, so H = Q");
  }
  if (iso.is_no() && dh.kind == VerdictKind::yes) {
    auto v = V::no(iso.cert, "H is division and not isomorphic to Q");
    return v;
  }
  return V::unknown(height, "isomorphism with Q not settled");
}

bool is_quaternion_basis(const Quaternion& u, const Quaternion& v, const Value& r, const Value& s) {
  const Quat& H = u.alg;
  const Quaternion one = H->one();
  return u * (one + u) == H->scalar(r) && v * v == H->scalar(s) && u * v == v * (one + u) && !s.is_zero();
}

BasisChange change_basis(const Quat& H, BasisChangeMode mode, const Value& l, const Value& m) {
  BasisChange bc;
  const Quaternion one = H->one();
  const Quaternion pure = H->v().scaled(l) + H->w().scaled(m);
  if (mode == BasisChangeMode::shift_u) {
    bc.u = H->u() + pure;
    bc.v = H->v();
    if (!m.is_zero()) {
      // v' = v fails u'v' + v'u' = v' when m != 0; take v' in span(v, w) solving it
      Field f = H->field();
      const Quaternion& u1 = bc.u;
      Matrix L(f, 4, 2);
      const Quaternion vs[2] = {H->v(), H->w()};
      for (size_t j = 0; j < 2; ++j) {
        const Quaternion img = u1 * vs[j] + vs[j] * u1 + vs[j];
        for (size_t i = 0; i < 4; ++i) L(i, j) = img.x[i];
      }
      auto ker = kernel(L);
      if (ker.empty()) throw std::logic_error("no v' for the shifted u'");
      bc.v = vs[0].scaled(ker[0][0]) + vs[1].scaled(ker[0][1]);
      bc.report.push_back("v' = v does not satisfy u'v' = v'(1+u') when the w-coefficient is nonzero; v' adjusted to " +
                          bc.v.to_string());
    }
  } else {
    bc.u = H->u();
    bc.v = pure;
    const Quaternion sq = pure * pure;
    bool scalar = true;
    for (size_t i = 1; i < 4; ++i) scalar = scalar && sq.x[i].is_zero();
    if (!scalar || sq.x[0].is_zero())
      throw Error(Error::Kind::precondition_failed, "(l v + m w)^2 must be a nonzero scalar");
  }
  bc.w = bc.u * bc.v;
  const Quaternion ru = bc.u * (one + bc.u), sv = bc.v * bc.v;
  bc.r = ru.x[0];
  bc.s = sv.x[0];
  bc.verified = is_quaternion_basis(bc.u, bc.v, bc.r, bc.s);
  // the new basis spans H
  Matrix B = Matrix::from_columns(H->field(), 4, {one.x, bc.u.x, bc.v.x, bc.w.x});
  bc.verified = bc.verified && !det(B).is_zero();
  bc.report.push_back("u'(1+u') = " + bc.r.to_string());
  bc.report.push_back("v'^2 = " + bc.s.to_string());
  bc.report.push_back(std::string("relations ") + (bc.verified ? "verified" : "FAILED"));
  return bc;
}

}  // namespace qfc2
