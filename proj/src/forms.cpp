#include "qfc2/forms.hpp"

namespace qfc2 {

// ---------------------------------------------------------------- bilinear forms

BilinearForm::BilinearForm(Matrix gram) : gram_(std::move(gram)) {
  if (!gram_.is_square() || gram_ != gram_.transpose())
    throw Error(Error::Kind::precondition_failed, "bilinear Gram matrix must be symmetric");
}

BilinearForm BilinearForm::diagonal(Field f, const Vec& entries) {
  Matrix m(f, entries.size(), entries.size());
  for (size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return BilinearForm(m);
}

BilinearForm BilinearForm::pfister(Field f, const Vec& slots) {
  BilinearForm b = diagonal(f, {Value::one(f)});
  for (const auto& s : slots) b = b.tensor(diagonal(f, {Value::one(f), s}));
  return b;
}

BilinearForm BilinearForm::hyperbolic(Field f) {
  Matrix m(f, 2, 2);
  m(0, 1) = m(1, 0) = Value::one(f);
  return BilinearForm(m);
}

Value BilinearForm::operator()(const Vec& x, const Vec& y) const { return dot(x, gram_.apply(y)); }

bool BilinearForm::is_nondegenerate() const { return rank(gram_) == dim(); }

bool BilinearForm::is_alternating() const {
  for (size_t i = 0; i < dim(); ++i)
    if (!gram_(i, i).is_zero()) return false;
  return true;
}

BilinearForm BilinearForm::orth(const BilinearForm& o) const { return BilinearForm(gram_.direct_sum(o.gram_)); }

BilinearForm BilinearForm::tensor(const BilinearForm& o) const {
  const size_t n = dim(), m = o.dim();
  Matrix g(field(), n * m, n * m);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (gram_(i, j).is_zero()) continue;
      for (size_t p = 0; p < m; ++p)
        for (size_t r = 0; r < m; ++r) g(i * m + p, j * m + r) = gram_(i, j) * o.gram_(p, r);
    }
  return BilinearForm(g);
}

BilinearForm BilinearForm::scaled(const Value& c) const { return BilinearForm(gram_.scaled(c)); }

BilinearForm BilinearForm::transform(const Matrix& T) const { return BilinearForm(T.transpose() * gram_ * T); }

// ---------------------------------------------------------------- quadratic forms

QuadraticForm::QuadraticForm(const Matrix& m) : m_(m.field(), m.rows(), m.cols()) {
  if (!m.is_square()) throw Error(Error::Kind::precondition_failed, "quadratic Gram matrix must be square");
  for (size_t i = 0; i < m.rows(); ++i) {
    m_(i, i) = m(i, i);
    for (size_t j = i + 1; j < m.rows(); ++j) m_(i, j) = m(i, j) + m(j, i);
  }
}

QuadraticForm QuadraticForm::zero(Field f, size_t n) { return QuadraticForm(Matrix(f, n, n)); }

QuadraticForm QuadraticForm::block(const Value& a, const Value& b) {
  if (a.field() != b.field()) throw Error(Error::Kind::field_mismatch, "block entries over different fields");
  Matrix m(a.field(), 2, 2);
  m(0, 0) = a;
  m(0, 1) = Value::one(a.field());
  m(1, 1) = b;
  return QuadraticForm(m);
}

QuadraticForm QuadraticForm::hyperbolic(Field f) { return block(Value::zero(f), Value::zero(f)); }

QuadraticForm QuadraticForm::diagonal(Field f, const Vec& entries) {
  Matrix m(f, entries.size(), entries.size());
  for (size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return QuadraticForm(m);
}

QuadraticForm QuadraticForm::pfister(Field f, const Vec& slots, const Value& c) {
  return tensor(BilinearForm::pfister(f, slots), block(Value::one(f), c));
}

Matrix QuadraticForm::polar_gram() const { return m_ + m_.transpose(); }

Value QuadraticForm::operator()(const Vec& x) const {
  if (x.size() != dim()) throw Error(Error::Kind::precondition_failed, "vector length mismatch");
  Value s = Value::zero(field());
  for (size_t i = 0; i < dim(); ++i) {
    if (x[i].is_zero()) continue;
    for (size_t j = i; j < dim(); ++j)
      if (!x[j].is_zero() && !m_(i, j).is_zero()) s += m_(i, j) * x[i] * x[j];
  }
  return s;
}

Value QuadraticForm::polar(const Vec& x, const Vec& y) const { return dot(x, polar_gram().apply(y)); }

QuadraticForm QuadraticForm::orth(const QuadraticForm& o) const {
  if (dim() == 0) return o;
  if (o.dim() == 0) return *this;
  if (field() != o.field()) throw Error(Error::Kind::field_mismatch, "orthogonal sum over different fields");
  return QuadraticForm(m_.direct_sum(o.m_));
}

QuadraticForm QuadraticForm::scaled(const Value& c) const { return QuadraticForm(m_.scaled(c)); }

QuadraticForm QuadraticForm::transform(const Matrix& T) const { return QuadraticForm(T.transpose() * m_ * T); }

bool QuadraticForm::is_quasilinear() const { return polar_gram().is_zero(); }

std::string QuadraticForm::to_string() const {
  const size_t n = dim();
  if (n == 0) return "<>";
  // literal block shape?
  std::vector<std::string> parts;
  std::vector<std::string> diag;
  bool ok = true;
  size_t i = 0;
  auto flush = [&] {
    if (diag.empty()) return;
    std::string s = "<";
    for (size_t k = 0; k < diag.size(); ++k) s += (k ? "," : "") + diag[k];
    parts.push_back(s + ">");
    diag.clear();
  };
  auto row_clear = [&](size_t r, size_t from) {
    for (size_t j = from; j < n; ++j)
      if (!m_(r, j).is_zero()) return false;
    return true;
  };
  while (i < n && ok) {
    if (i + 1 < n && !m_(i, i + 1).is_zero()) {
      if (!row_clear(i, i + 2) || !row_clear(i + 1, i + 2)) {
        ok = false;
        break;
      }
      flush();
      const Value u = m_(i, i + 1);
      if (u.is_one())
        parts.push_back("[" + m_(i, i).to_string() + "," + m_(i + 1, i + 1).to_string() + "]");
      else
      {
        std::string us = u.to_string();
        if (us.find_first_of("+/*") != std::string::npos) us = "(" + us + ")";
        parts.push_back(us + "*[" + (m_(i, i) / u).to_string() + "," + (m_(i + 1, i + 1) / u).to_string() + "]");
      }
      i += 2;
    } else {
      if (!row_clear(i, i + 1)) {
        ok = false;
        break;
      }
      diag.push_back(m_(i, i).to_string());
      ++i;
    }
  }
  if (ok) {
    flush();
    std::string s;
    for (size_t k = 0; k < parts.size(); ++k) s += (k ? " + " : "") + parts[k];
    return s;
  }
  std::string s = "gram[";
  for (size_t r = 0; r < n; ++r) {
    s += r ? ",[" : "[";
    for (size_t c = 0; c < n; ++c) s += (c ? "," : "") + m_(r, c).to_string();
    s += "]";
  }
  return s + "]";
}

QuadraticForm tensor(const BilinearForm& b, const QuadraticForm& q) {
  if (b.field() != q.field()) throw Error(Error::Kind::field_mismatch, "tensor product over different fields");
  const size_t n = b.dim(), m = q.dim();
  const Matrix& B = b.gram();
  const Matrix& M = q.gram_upper();
  const Matrix P = q.polar_gram();
  Matrix g(q.field(), n * m, n * m);
  for (size_t i = 0; i < n; ++i) {
    if (!B(i, i).is_zero())
      for (size_t p = 0; p < m; ++p)
        for (size_t r = p; r < m; ++r) g(i * m + p, i * m + r) = B(i, i) * M(p, r);
    for (size_t j = i + 1; j < n; ++j) {
      if (B(i, j).is_zero()) continue;
      for (size_t p = 0; p < m; ++p)
        for (size_t r = 0; r < m; ++r) g(i * m + p, j * m + r) = B(i, j) * P(p, r);
    }
  }
  return QuadraticForm(g);
}

QuadraticForm compose(const std::vector<ComposePart>& parts) {
  QuadraticForm out;
  bool first = true;
  for (const auto& p : parts) {
    QuadraticForm f = p.bilinear ? tensor(*p.bilinear, p.form) : p.form;
    if (p.scalar.field() != f.field()) throw Error(Error::Kind::field_mismatch, "compose over different fields");
    f = f.scaled(p.scalar);
    out = first ? f : out.orth(f);
    first = false;
  }
  return out;
}

// ---------------------------------------------------------------- witnesses

bool check_isometry(const QuadraticForm& source, const QuadraticForm& target, const Matrix& T) {
  if (source.field() != target.field() || T.field() != source.field()) return false;
  if (!T.is_square() || T.rows() != source.dim() || target.dim() != source.dim()) return false;
  if (source.dim() == 0) return true;
  if (det(T).is_zero()) return false;
  return target.transform(T) == source;
}

bool check_embedding(const QuadraticForm& sub, const QuadraticForm& q, const Matrix& E) {
  if (E.rows() != q.dim() || E.cols() != sub.dim()) return false;
  if (sub.dim() == 0) return true;
  if (rank(E) != sub.dim()) return false;
  return q.transform(E) == sub;
}

IsometryWitness IsometryWitness::inverse() const {
  if (source.dim() == 0) return {target, source, T};
  auto inv = qfc2::inverse(T);
  if (!inv) throw Error(Error::Kind::precondition_failed, "witness matrix is singular");
  return {target, source, *inv};
}

IsometryWitness IsometryWitness::then(const IsometryWitness& next) const {
  if (source.dim() == 0) return {source, next.target, T};
  return {source, next.target, next.T * T};
}

// ---------------------------------------------------------------- misc

std::string to_string(Cert c) {
  switch (c) {
    case Cert::none: return "none";
    case Cert::finite_field_exhaustion: return "finite-field-exhaustion";
    case Cert::degree_parity: return "degree-parity";
    case Cert::wp_nonmembership: return "wp-nonmembership";
    case Cert::radical_anisotropy: return "radical-anisotropy";
    case Cert::invariant_separation: return "invariant-separation";
    case Cert::dimension: return "dimension";
    case Cert::structural: return "structural";
  }
  return "none";
}

std::string to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::yes: return "yes";
    case VerdictKind::no: return "no";
    case VerdictKind::unknown: return "unknown";
  }
  return "unknown";
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::nonsingular: return "nonsingular";
    case Classification::nondegenerate: return "nondegenerate";
    case Classification::degenerate: return "degenerate";
  }
  return "degenerate";
}

int default_height(Field f) {
  if (f->is_finite()) return 0;
  return f->depth == 1 ? 4 : 2;
}

// ---------------------------------------------------------------- analysis

Analysis analyze(const QuadraticForm& q) {
  Analysis a;
  a.dim = q.dim();
  a.polar = q.polar();
  if (q.dim() == 0) {
    a.classification = Classification::nonsingular;
    return a;
  }
  auto rad = kernel(a.polar.gram());
  a.radical_dim = rad.size();
  if (rad.empty()) a.classification = Classification::nonsingular;
  else if (rad.size() == 1 && !q(rad[0]).is_zero()) a.classification = Classification::nondegenerate;
  else a.classification = Classification::degenerate;
  return a;
}

NormalForm block_normalize(const QuadraticForm& q) {
  Field f = q.field();
  const size_t n = q.dim();
  const Matrix B = q.polar_gram();
  auto b = [&](const Vec& x, const Vec& y) { return dot(x, B.apply(y)); };
  std::vector<Vec> rest;
  for (size_t i = 0; i < n; ++i) rest.push_back(unit_vec(f, n, i));
  std::vector<Vec> basis;
  NormalForm nf;
  for (;;) {
    size_t xi = rest.size(), yi = rest.size();
    for (size_t i = 0; i < rest.size() && xi == rest.size(); ++i)
      for (size_t j = i + 1; j < rest.size(); ++j)
        if (!b(rest[i], rest[j]).is_zero()) {
          xi = i;
          yi = j;
          break;
        }
    if (xi == rest.size()) break;
    Vec x = rest[xi];
    Vec y = scale(rest[yi], b(rest[xi], rest[yi]).inv());
    std::vector<Vec> next;
    for (size_t k = 0; k < rest.size(); ++k) {
      if (k == xi || k == yi) continue;
      const Value bzy = b(rest[k], y), bzx = b(rest[k], x);
      next.push_back(add(add(rest[k], scale(x, bzy)), scale(y, bzx)));
    }
    rest = std::move(next);
    nf.blocks.emplace_back(q(x), q(y));
    basis.push_back(x);
    basis.push_back(y);
  }
  for (const auto& z : rest) {
    nf.diagonal.push_back(q(z));
    basis.push_back(z);
  }
  QuadraticForm form = QuadraticForm::zero(f, 0);
  for (const auto& [a, c] : nf.blocks) form = form.orth(QuadraticForm::block(a, c));
  if (!nf.diagonal.empty()) form = form.orth(QuadraticForm::diagonal(f, nf.diagonal));
  if (n == 0) form = q;
  nf.form = form;
  nf.witness = {form, q, Matrix::from_columns(f, n, basis)};
  if (!nf.witness.verify()) throw std::logic_error("block normalization witness failed");
  return nf;
}

ArtinSchreierClass arf(const QuadraticForm& q) {
  if (analyze(q).classification != Classification::nonsingular)
    throw Error(Error::Kind::not_nonsingular, "Arf invariant needs a nonsingular form");
  NormalForm nf = block_normalize(q);
  Value s = Value::zero(q.field());
  for (const auto& [a, b] : nf.blocks) s += a * b;
  return as_class(s);
}

// ---------------------------------------------------------------- identities

namespace {

Matrix columns(Field f, size_t n, const std::vector<std::vector<std::pair<size_t, Value>>>& cols) {
  Matrix m(f, n, cols.size());
  for (size_t j = 0; j < cols.size(); ++j)
    for (const auto& [i, v] : cols[j]) m(i, j) += v;
  return m;
}

Verdict<IdentityResult> finish(const QuadraticForm& in, const QuadraticForm& out, const Matrix& P) {
  // P: out -> in, so the input -> output witness is P^-1
  IsometryWitness w = IsometryWitness{out, in, P}.inverse();
  if (!w.verify()) throw std::logic_error("identity witness failed to verify");
  return Verdict<IdentityResult>::yes(IdentityResult{in, out, w});
}

void need(size_t have, size_t want, int id) {
  if (have != want)
    throw Error(Error::Kind::precondition_failed,
                "identity " + std::to_string(id) + " takes " + std::to_string(want) + " operands");
}

}  // namespace

Verdict<IdentityResult> apply_identity(int id, const Vec& ops, int height) {
  if (ops.empty()) throw Error(Error::Kind::precondition_failed, "identity needs operands");
  Field f = ops[0].field();
  for (const auto& v : ops)
    if (v.field() != f) throw Error(Error::Kind::field_mismatch, "identity operands over different fields");
  const Value one = Value::one(f), zero = Value::zero(f);
  switch (id) {
    case 1: {
      need(ops.size(), 4, id);
      const Value &b1 = ops[0], &b2 = ops[1], &c1 = ops[2], &c2 = ops[3];
      auto in = QuadraticForm::block(b1, b2).orth(QuadraticForm::block(c1, c2));
      auto out = QuadraticForm::block(b1 + c1, b2).orth(QuadraticForm::block(c1, b2 + c2));
      // e1 f1 e2 f2 -> e1+e2, f1, e2, f1+f2
      Matrix P = columns(f, 4, {{{0, one}, {2, one}}, {{1, one}}, {{2, one}}, {{1, one}, {3, one}}});
      return finish(in, out, P);
    }
    case 2: {
      need(ops.size(), 2, id);
      const Value &b1 = ops[0], &b2 = ops[1];
      auto in = QuadraticForm::block(one, b1).orth(QuadraticForm::block(one, b2));
      auto out = QuadraticForm::block(one, b1 + b2).orth(QuadraticForm::hyperbolic(f));
      Matrix P = columns(f, 4, {{{2, one}}, {{1, one}, {3, one}}, {{0, one}, {2, one}}, {{1, one}, {0, b1}, {2, b1}}});
      return finish(in, out, P);
    }
    case 3: {
      need(ops.size(), 3, id);
      const Value &x = ops[0], &b1 = ops[1], &b2 = ops[2];
      if (x.is_zero()) throw Error(Error::Kind::precondition_failed, "identity 3 needs x != 0");
      auto in = QuadraticForm::block(b1, b2).scaled(x);
      auto out = QuadraticForm::block(x * b1, x.inv() * b2);
      Matrix P = columns(f, 2, {{{0, one}}, {{1, x.inv()}}});
      return finish(in, out, P);
    }
    case 4: {
      need(ops.size(), 3, id);
      const Value &b1 = ops[0], &b2 = ops[1], &c1 = ops[2];
      auto in = QuadraticForm::block(b1, b2).orth(QuadraticForm::diagonal(f, {c1}));
      auto out = QuadraticForm::block(b1 + c1, b2).orth(QuadraticForm::diagonal(f, {c1}));
      Matrix P = columns(f, 3, {{{0, one}, {2, one}}, {{1, one}}, {{2, one}}});
      return finish(in, out, P);
    }
    case 5: {
      need(ops.size(), 3, id);
      const Value &b1 = ops[0], &b2 = ops[1], &c1 = ops[2];
      if (c1.is_zero()) throw Error(Error::Kind::precondition_failed, "identity 5 needs c1 != 0");
      auto in = QuadraticForm::block(b1, b2).orth(QuadraticForm::diagonal(f, {c1}));
      auto out = QuadraticForm::hyperbolic(f).orth(QuadraticForm::diagonal(f, {c1}));
      auto iso = isotropic_vector(in, height < 0 ? default_height(f) : height);
      if (iso.is_no())
        throw Error(Error::Kind::precondition_failed, "identity 5 needs an isotropic input; it is anisotropic (" +
                                                          to_string(iso.cert) + ")");
      if (iso.is_unknown()) return Verdict<IdentityResult>::unknown(iso.height, "isotropy not settled");
      const Vec v = *iso.witness;
      // v is not radical since c1 != 0; pick w with b(v,w) = 1 inside the block
      const Value bv_e = in.polar(v, unit_vec(f, 3, 0)), bv_f = in.polar(v, unit_vec(f, 3, 1));
      Vec w = !bv_e.is_zero() ? scale(unit_vec(f, 3, 0), bv_e.inv()) : scale(unit_vec(f, 3, 1), bv_f.inv());
      w = add(w, scale(v, in(w)));
      Matrix P = Matrix::from_columns(f, 3, {v, w, unit_vec(f, 3, 2)});
      (void)zero;
      return finish(in, out, P);
    }
    default:
      throw Error(Error::Kind::precondition_failed, "identity id must be 1..5");
  }
}

}  // namespace qfc2
