#include "qfc2/pairs.hpp"

#include <cmath>

namespace qfc2 {

/// Coordinates on the Sym basis from a square pivot block.
struct SymCoordinates {
  Matrix S;
  std::vector<size_t> pivots;
  Matrix inv;

  explicit SymCoordinates(const Algebra& A) : S(Matrix::from_columns(A.field(), A.dim(), A.sym_basis())) {
    Matrix t = S.transpose();
    pivots = row_reduce(t);
    Matrix sub(A.field(), pivots.size(), S.cols());
    for (size_t i = 0; i < pivots.size(); ++i)
      for (size_t j = 0; j < S.cols(); ++j) sub(i, j) = S(pivots[i], j);
    auto i = inverse(sub);
    if (!i) throw std::logic_error("Sym basis is dependent");
    inv = *i;
  }

  std::optional<Vec> operator()(const Vec& s) const {
    Vec r;
    r.reserve(pivots.size());
    for (size_t p : pivots) r.push_back(s[p]);
    Vec c = inv.apply(r);
    if (S.apply(c) != s) return std::nullopt;
    return c;
  }
};

namespace {

using K = AlgebraExpression::Kind;

Error precondition(const std::string& msg) { return Error(Error::Kind::precondition_failed, msg); }
Error unsupported(const std::string& msg) { return Error(Error::Kind::unsupported, msg); }

Vec kron(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() * b.size());
  for (const Value& x : a)
    for (const Value& y : b) out.push_back(x * y);
  return out;
}

Vec matrix_vec(const Matrix& M) {
  Vec out;
  for (size_t i = 0; i < M.rows(); ++i)
    for (size_t j = 0; j < M.cols(); ++j) out.push_back(M(i, j));
  return out;
}

Matrix vec_matrix(Field f, const Vec& v, size_t n) {
  Matrix M(f, n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) M(i, j) = v[i * n + j];
  return M;
}


void check_shape(const Algebra& A) {
  const size_t n = A.degree();
  if (n == 0 || n % 2 != 0) throw precondition("quadratic pairs need a central simple algebra of even degree");
  if (A.sym_basis().size() != n * (n + 1) / 2) throw precondition("Sym(A, sigma) must have dimension n(n+1)/2");
  if (!A.has_trd()) throw unsupported("reduced trace not available");
}

/// Values on Sym of the unique semi-trace with the prescribed values on extra symmetric elements.
Vec solve_semitrace(const Algebra& A, const SymCoordinates& sym_coordinates,
                    const std::vector<std::pair<Vec, Value>>& extra) {
  Field f = A.field();
  const size_t m = A.sym_basis().size();
  std::vector<Vec> rows;
  Vec rhs;
  auto add_row = [&](const Vec& s, const Value& v) {
    auto c = sym_coordinates(s);
    if (!c) throw std::logic_error("element is not symmetric");
    rows.push_back(*c);
    rhs.push_back(v);
  };
  for (size_t i = 0; i < A.dim(); ++i) {
    const Vec x = A.basis(i);
    add_row(add(x, A.sigma(x)), A.trd(x));
  }
  for (const auto& [s, v] : extra) add_row(s, v);
  const Matrix R = Matrix::from_rows(f, rows);
  if (rank(R) != m) throw std::logic_error("semi-trace is not determined by the prescribed values");
  auto sol = solve(R, rhs);
  if (!sol) throw std::logic_error("prescribed values are inconsistent with a semi-trace");
  return *sol;
}

bool same_quat(const Quat& a, const Quat& b) { return a->r() == b->r() && a->s() == b->s(); }

/// M_N(F) -> materialize(e) for recognisably split presentations.
std::optional<std::pair<size_t, Matrix>> split_map_expr(const Expr& e) {
  Field f = e->field();
  switch (e->kind()) {
    case K::base: return std::make_pair(size_t{1}, Matrix::identity(f, 1));
    case K::adjoint_bilinear: {
      const size_t n = e->bilinear()->dim();
      return std::make_pair(n, Matrix::identity(f, n * n));
    }
    case K::twist: return split_map_expr(e->left());
    case K::matrix: {
      auto inner = split_map_expr(e->left());
      if (!inner) return std::nullopt;
      const size_t n = e->size(), Ni = inner->first, N = n * Ni, da = Ni * Ni;
      Matrix M(f, N * N, N * N);
      for (size_t a = 0; a < n; ++a)
        for (size_t b = 0; b < n; ++b)
          for (size_t i = 0; i < Ni; ++i)
            for (size_t j = 0; j < Ni; ++j) {
              const Vec img = inner->second.column(i * Ni + j);
              const size_t col = (a * Ni + i) * N + (b * Ni + j);
              for (size_t k = 0; k < da; ++k) M((a * n + b) * da + k, col) = img[k];
            }
      return std::make_pair(N, M);
    }
    case K::tensor: {
      const Expr& l = e->left();
      const Expr& r = e->right();
      if (l->kind() == K::quat && r->kind() == K::quat && same_quat(l->quaternion(), r->quaternion())) {
        // x (x) y -> (z -> x z conj(y)) identifies H (x) H with End(H)
        const Quat& H = l->quaternion();
        Matrix Phi(f, 16, 16);
        for (size_t i = 0; i < 4; ++i)
          for (size_t j = 0; j < 4; ++j)
            for (size_t k = 0; k < 4; ++k) {
              const Quaternion img = H->mul(H->mul(H->basis(i), H->basis(k)), H->conj(H->basis(j)));
              for (size_t a = 0; a < 4; ++a) Phi(a * 4 + k, i * 4 + j) = img.x[a];
            }
        auto inv = inverse(Phi);
        if (!inv) throw std::logic_error("H (x) H -> End(H) is not bijective");
        return std::make_pair(size_t{4}, *inv);
      }
      auto L = split_map_expr(l);
      auto R = split_map_expr(r);
      if (!L || !R) return std::nullopt;
      const size_t N1 = L->first, N2 = R->first, N = N1 * N2;
      std::vector<Vec> cols(N * N);
      for (size_t i = 0; i < N1; ++i)
        for (size_t j = 0; j < N1; ++j)
          for (size_t k = 0; k < N2; ++k)
            for (size_t l2 = 0; l2 < N2; ++l2)
              cols[(i * N2 + k) * N + (j * N2 + l2)] =
                  kron(L->second.column(i * N1 + j), R->second.column(k * N2 + l2));
      return std::make_pair(N, Matrix::from_columns(f, N * N * 1, cols));
    }
    default: return std::nullopt;
  }
}

/// The quaternion algebra Brauer-equivalent to materialize(e), when the tree shows it.
std::optional<Quat> brauer_quat(const Expr& e) {
  switch (e->kind()) {
    case K::quat: return e->quaternion();
    case K::matrix:
    case K::twist: return brauer_quat(e->left());
    case K::adjoint_hermitian: return e->hermitian()->algebra();
    case K::tensor: {
      if (split_map_expr(e->left())) return brauer_quat(e->right());
      if (split_map_expr(e->right())) return brauer_quat(e->left());
      return std::nullopt;
    }
    default: return std::nullopt;
  }
}

VerdictKind quat_isomorphic(const Quat& H, const Quat& Q, int height, std::optional<IsometryWitness>* w = nullptr) {
  const auto iso = is_isometric(Q->norm_form(), H->norm_form(), height);
  if (iso.is_yes() && w) *w = *iso.witness;
  return iso.kind;
}

}  // namespace

// ---- QuadraticPair

QuadraticPair QuadraticPair::make(Expr expr, Vec values) {
  QuadraticPair P;
  P.attach(std::move(expr));
  if (values.size() != P.A_->sym_basis().size()) throw precondition("semi-trace values have the wrong size");
  P.values_ = std::move(values);
  if (!P.check_semitrace()) throw precondition("f(x + sigma(x)) != Trd(x): not a semi-trace");
  return P;
}

void QuadraticPair::attach(Expr expr) {
  A_ = materialize(expr);
  expr_ = std::move(expr);
  check_shape(*A_);
  coords_ = std::make_shared<const SymCoordinates>(*A_);
}

Value QuadraticPair::f(const Vec& s) const {
  auto c = (*coords_)(s);
  if (!c) throw precondition("element is not symmetric");
  return dot(values_, *c);
}

bool QuadraticPair::check_semitrace() const {
  for (size_t i = 0; i < A_->dim(); ++i) {
    const Vec x = A_->basis(i);
    if (f(add(x, A_->sigma(x))) != A_->trd(x)) return false;
  }
  return true;
}

std::string QuadraticPair::to_string() const {
  switch (kind_) {
    case Kind::adjoint: return "Ad(" + form_->to_string() + ")";
    case Kind::boxtimes: return left_->to_string() + " box " + right_->to_string();
    case Kind::tensor: return left_->to_string() + " (x) (" + right_->to_string() + ", f)";
    case Kind::given: break;
  }
  return "(" + expr_->to_string() + ", f)";
}

QuadraticPair adjoint_pair(const QuadraticForm& rho) {
  if (analyze(rho).classification != Classification::nonsingular)
    throw Error(Error::Kind::not_nonsingular, "NotNonsingular: " + rho.to_string());
  Field f = rho.field();
  const size_t n = rho.dim();
  const BilinearForm b = rho.polar();
  QuadraticPair P;
  P.attach(AlgebraExpression::adjoint(b));
  // x x^T B is the image of x (x) x; f(x x^T B) = rho(x) on e_i and e_i + e_j
  std::vector<Vec> pts;
  Vec vals;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i; j < n; ++j) {
      Vec x = unit_vec(f, n, i);
      if (j != i) x[j] = Value::one(f);
      const Matrix X = Matrix::from_columns(f, n, {x});
      pts.push_back(matrix_vec(X * X.transpose() * b.gram()));
      vals.push_back(rho(x));
    }
  std::vector<Vec> rows;
  for (const Vec& s : pts) rows.push_back(*(*P.coords_)(s));
  auto v = solve(Matrix::from_rows(f, rows), vals);
  if (!v) throw std::logic_error("rank-one symmetric elements do not span Sym");
  P.values_ = *v;
  if (!P.check_semitrace()) throw std::logic_error("adjoint semi-trace check failed");
  P.kind_ = QuadraticPair::Kind::adjoint;
  P.form_ = rho;
  return P;
}

QuadraticPair tensor_pair(const Expr& B, const QuadraticPair& P) {
  if (B->field() != P.field()) throw Error(Error::Kind::field_mismatch, "FieldMismatch: tensor factors over different fields");
  const Alg Bal = materialize(B);
  if (!Bal->has_trd()) throw unsupported("reduced trace of B not available");
  QuadraticPair out;
  out.attach(AlgebraExpression::tensor(B, P.expr()));
  std::vector<std::pair<Vec, Value>> extra;
  const Algebra& A = *P.algebra();
  for (const Vec& b : Bal->sym_basis())
    for (const Vec& a : A.sym_basis()) extra.emplace_back(kron(b, a), Bal->trd(b) * P.f(a));
  out.values_ = solve_semitrace(*out.A_, *out.coords_, extra);
  if (Bal->degree() > 1 && involution_type(*Bal) == InvolutionType::symplectic) {
    out.kind_ = QuadraticPair::Kind::boxtimes;
  } else {
    out.kind_ = QuadraticPair::Kind::tensor;
  }
  out.left_ = B;
  out.right_ = P.expr();
  return out;
}

QuadraticPair boxtimes(const Expr& L, const Expr& R) {
  if (L->field() != R->field()) throw Error(Error::Kind::field_mismatch, "FieldMismatch: factors over different fields");
  const Alg La = materialize(L), Ra = materialize(R);
  if (involution_type(*La) != InvolutionType::symplectic || involution_type(*Ra) != InvolutionType::symplectic)
    throw precondition("NotSymplectic: both involutions must be symplectic");
  QuadraticPair out;
  out.attach(AlgebraExpression::tensor(L, R));
  std::vector<std::pair<Vec, Value>> extra;
  const Value zero = Value::zero(L->field());
  for (const Vec& b : La->sym_basis())
    for (const Vec& a : Ra->sym_basis()) extra.emplace_back(kron(b, a), zero);
  out.values_ = solve_semitrace(*out.A_, *out.coords_, extra);
  out.kind_ = QuadraticPair::Kind::boxtimes;
  out.left_ = L;
  out.right_ = R;
  return out;
}

// ---- split pairs

std::optional<Matrix> split_map(const QuadraticPair& P) {
  auto m = split_map_expr(P.expr());
  if (!m) return std::nullopt;
  return m->second;
}

static QuadraticForm adjoint_form_with(const QuadraticPair& P, const Matrix& M, const Matrix& B);

QuadraticForm adjoint_form(const QuadraticPair& P) {
  const auto Mo = split_map(P);
  if (!Mo) throw unsupported("UnsupportedPresentation: no split presentation of " + P.to_string());
  const Matrix& M = *Mo;
  Field f = P.field();
  const Algebra& A = *P.algebra();
  const size_t N = static_cast<size_t>(std::lround(std::sqrt(static_cast<double>(A.dim()))));
  const auto Mi = inverse(M);
  if (!Mi) throw std::logic_error("split map is singular");
  if (P.expr()->kind() == K::adjoint_bilinear) return adjoint_form_with(P, M, P.expr()->bilinear()->gram());
  // B with B sigma'(X) = X^T B on the basis
  Matrix S(f, N * N * N * N, N * N);
  size_t row = 0;
  for (size_t a = 0; a < N * N; ++a) {
    const Matrix X = vec_matrix(f, unit_vec(f, N * N, a), N);
    const Matrix Sx = vec_matrix(f, Mi->apply(A.sigma(M.column(a))), N);
    for (size_t r = 0; r < N; ++r)
      for (size_t c = 0; c < N; ++c, ++row)
        for (size_t k = 0; k < N; ++k) {
          S(row, r * N + k) += Sx(k, c);
          S(row, k * N + c) += X(k, r);
        }
  }
  const auto ker = kernel(S);
  if (ker.size() != 1) throw std::logic_error("involution is not adjoint to a unique bilinear form");
  return adjoint_form_with(P, M, vec_matrix(f, ker[0], N));
}

static QuadraticForm adjoint_form_with(const QuadraticPair& P, const Matrix& M, const Matrix& B) {
  Field f = P.field();
  const size_t N = B.rows();
  Matrix U(f, N, N);
  auto rho = [&](const Vec& x) {
    const Matrix Xc = Matrix::from_columns(f, N, {x});
    return P.f(M.apply(matrix_vec(Xc * Xc.transpose() * B)));
  };
  for (size_t i = 0; i < N; ++i) U(i, i) = rho(unit_vec(f, N, i));
  for (size_t i = 0; i < N; ++i)
    for (size_t j = i + 1; j < N; ++j) {
      Vec x = unit_vec(f, N, i);
      x[j] = Value::one(f);
      U(i, j) = rho(x) + U(i, i) + U(j, j);
    }
  QuadraticForm q(U);
  if (q.polar_gram() != B) throw std::logic_error("adjoint form does not have the expected polar form");
  return q;
}

bool PairMap::verify() const {
  if (!AlgebraMap{source.algebra(), target.algebra(), M}.verify()) return false;
  for (const Vec& s : source.algebra()->sym_basis())
    if (target.f(M.apply(s)) != source.f(s)) return false;
  return true;
}

Verdict<Matrix> pair_isomorphic(const QuadraticPair& P1, const QuadraticPair& P2, int height) {
  using V = Verdict<Matrix>;
  Field f = P1.field();
  if (P2.field() != f) throw Error(Error::Kind::field_mismatch, "pairs over different fields");
  if (P1.algebra()->dim() != P2.algebra()->dim()) return V::no(Cert::dimension, "degrees differ");
  const auto M1 = split_map(P1), M2 = split_map(P2);
  if (M1 && M2) {
    const QuadraticForm r1 = adjoint_form(P1), r2 = adjoint_form(P2);
    const auto sim = similar(r1, r2, height);
    if (!sim.is_yes()) {
      V v = sim.is_no() ? V::no(sim.cert, "adjoint forms are not similar") : V::unknown(height, "similarity not settled");
      return v;
    }
    // X -> T X T^-1 carries Ad_r1 to Ad_r2
    const Matrix& T = sim.witness->witness.T;
    const Matrix Ti = *inverse(T);
    const size_t N = r1.dim();
    const Matrix M1i = *inverse(*M1);
    std::vector<Vec> cols;
    for (size_t a = 0; a < P1.algebra()->dim(); ++a) {
      const Matrix X = vec_matrix(f, M1i.apply(P1.algebra()->basis(a)), N);
      cols.push_back(M2->apply(matrix_vec(T * X * Ti)));
    }
    const Matrix Mp = Matrix::from_columns(f, P2.algebra()->dim(), cols);
    if (!PairMap{P1, P2, Mp}.verify()) throw std::logic_error("pair isomorphism from a similarity does not verify");
    return V::yes(Mp, "adjoint forms similar, factor " + to_string(sim.witness->factor));
  }
  const size_t n = P1.algebra()->dim();
  if (P1.expr()->to_string() == P2.expr()->to_string()) {
    const Matrix I = Matrix::identity(f, n);
    if (PairMap{P1, P2, I}.verify()) return V::yes(I, "identity");
  }
  const Expr& e1 = P1.expr();
  const Expr& e2 = P2.expr();
  if (e1->kind() == K::tensor && e2->kind() == K::tensor &&
      e1->left()->to_string() == e2->right()->to_string() && e1->right()->to_string() == e2->left()->to_string()) {
    const size_t da = materialize(e1->left())->dim(), db = materialize(e1->right())->dim();
    Matrix S(f, n, n);
    for (size_t i = 0; i < da; ++i)
      for (size_t j = 0; j < db; ++j) S(j * da + i, i * db + j) = Value::one(f);
    if (PairMap{P1, P2, S}.verify()) return V::yes(S, "exchange of the factors");
  }
  return V::unknown(height, "no isomorphism found");
}

// ---- hyperbolicity

bool check_pair_hyperbolic(const QuadraticPair& P, const Vec& e) {
  const Algebra& A = *P.algebra();
  if (A.mul(e, e) != e || A.sigma(e) != add(A.one(), e)) return false;
  for (const Vec& s : A.sym_basis())
    if (P.f(s) != A.trd(A.mul(e, s))) return false;
  return true;
}

Verdict<Vec> pair_hyperbolic(const QuadraticPair& P, int height) {
  using V = Verdict<Vec>;
  const Algebra& A = *P.algebra();
  Field f = P.field();
  std::vector<Vec> cands = A.data().hyperbolic_hints;
  if (auto M = split_map(P)) {
    const QuadraticForm rho = adjoint_form(P);
    const WittDecomposition W = witt_decompose(rho, height);
    if (W.anisotropic_part.dim() > 0 && W.residual.is_no())
      return V::no(W.residual.cert, "adjoint form is not hyperbolic");
    if (W.anisotropic_part.dim() == 0) {
      // projection onto span(e_i) along span(f_i) for a hyperbolic basis
      const size_t N = rho.dim();
      const Matrix Ti = *inverse(W.witness.T);
      const Matrix B = rho.polar_gram();
      Matrix p(f, N, N);
      for (size_t i = 0; i < W.index; ++i) {
        const Matrix e = Matrix::from_columns(f, N, {Ti.column(2 * i)});
        const Matrix g = Matrix::from_columns(f, N, {Ti.column(2 * i + 1)});
        const Matrix term = e * g.transpose() * B;
        p = p + term;
      }
      cands.insert(cands.begin(), M->apply(matrix_vec(p)));
    }
  }
  if (P.kind() == QuadraticPair::Kind::boxtimes || P.kind() == QuadraticPair::Kind::tensor) {
    const Alg L = materialize(P.left()), R = materialize(P.right());
    for (const Vec& e : L->data().hyperbolic_hints) cands.push_back(kron(e, R->one()));
    for (const Vec& e : R->data().hyperbolic_hints) cands.push_back(kron(L->one(), e));
  }
  for (const Vec& e : cands)
    if (check_pair_hyperbolic(P, e)) return V::yes(e, "hyperbolic idempotent");
  const auto h = hyperbolicity(A, height);
  if (h.is_no()) return V::no(h.cert, "involution is not hyperbolic: " + h.detail);
  if (h.is_yes() && check_pair_hyperbolic(P, *h.witness)) return V::yes(*h.witness, "hyperbolic idempotent");
  return V::unknown(height, "no idempotent compatible with f found");
}

// ---- discriminant

ArtinSchreierClass pair_discriminant(const QuadraticPair& P) {
  if (P.degree() % 2 != 0) throw precondition("discriminant needs even degree");
  if (split_map(P)) return arf(adjoint_form(P));
  if (P.kind() == QuadraticPair::Kind::boxtimes && P.degree() == 4) {
    const Alg L = materialize(P.left()), R = materialize(P.right());
    // (H+, bar) box (H-, bar): the Clifford algebra is H+ x H-
    if (L->degree() == 2 && R->degree() == 2) return as_class(Value::zero(P.field()));
  }
  throw unsupported("UnsupportedPresentation: discriminant of " + P.to_string());
}

// ---- over F_Q

std::string to_string(PairShape s) {
  switch (s) {
    case PairShape::split: return "split";
    case PairShape::brauer_Q: return "brauer_Q";
    case PairShape::degree4: return "degree4";
  }
  return "?";
}

namespace {

Verdict<PairOverFQ> finish_over_FQ(const PairOverFQ& out, VerdictKind k, Cert c, const std::string& why, int height) {
  using V = Verdict<PairOverFQ>;
  V v = k == VerdictKind::yes ? V::yes(out, why) : k == VerdictKind::no ? V::no(c, why) : V::unknown(height, why);
  v.witness = out;
  return v;
}

}  // namespace

Verdict<PairOverFQ> adjoint_over_FQ(const QuadraticForm& rho, const Quat& Q, int height) {
  if (Q->field() != rho.field()) throw Error(Error::Kind::field_mismatch, "Q over another field");
  if (analyze(rho).classification != Classification::nonsingular)
    throw Error(Error::Kind::not_nonsingular, "NotNonsingular: " + rho.to_string());
  PairOverFQ out;
  auto finish = [&](VerdictKind k, Cert c, const std::string& why) { return finish_over_FQ(out, k, c, why, height); };
  out.shape = PairShape::split;
  out.form = rho;
  out.discriminant = arf(rho);
  const WittDecomposition W = witt_decompose(rho, height);
  out.witt_index = W.index;
  // the index is exact once the anisotropic part is certified
  const bool exact = W.anisotropic_part.dim() == 0 || W.residual.is_no();
  if (W.anisotropic_part.dim() == 0) {
    out.hyperbolic_over_F = true;
  } else {
    const auto hv = hyperbolic_over_FQ(W.anisotropic_part, Q->norm_form(), height);
    if (hv.is_no() && exact) return finish(VerdictKind::no, hv.cert, "anisotropic part is not a multiple of n_Q");
    if (!hv.is_yes()) return finish(VerdictKind::unknown, Cert::none, "anisotropic part: " + hv.detail);
    out.multiple = *hv.witness;
  }
  out.contains_Q = !exact ? VerdictKind::unknown : W.index % 4 == 0 ? VerdictKind::yes : VerdictKind::no;
  return finish(VerdictKind::yes, Cert::none, "Witt index " + std::to_string(W.index));
}

Verdict<PairOverFQ> pair_over_FQ(const QuadraticPair& P, const Quat& Q, int height) {
  using V = Verdict<PairOverFQ>;
  Field f = P.field();
  if (Q->field() != f) throw Error(Error::Kind::field_mismatch, "Q over another field");
  PairOverFQ out;
  auto finish = [&](VerdictKind k, Cert c, const std::string& why) { return finish_over_FQ(out, k, c, why, height); };

  if (split_map(P)) {
    V v = adjoint_over_FQ(adjoint_form(P), Q, height);
    if (v.witness && v.witness->hyperbolic_over_F)
      if (auto e = pair_hyperbolic(P, height); e.is_yes()) v.witness->idempotent = *e.witness;
    return v;
  }

  if (P.degree() == 4 && P.kind() == QuadraticPair::Kind::boxtimes) {
    out.shape = PairShape::degree4;
    out.discriminant = pair_discriminant(P);
    const Expr& l = P.left();
    const Expr& r = P.right();
    auto component = [&](const Expr& e) -> std::optional<Quat> {
      if (e->kind() == K::quat) return e->quaternion();
      return std::nullopt;
    };
    const auto Hp = component(l), Hm = component(r);
    const bool lsplit = !Hp && split_map_expr(l).has_value();
    const bool rsplit = !Hm && split_map_expr(r).has_value();
    if ((!Hp && !lsplit) || (!Hm && !rsplit)) throw unsupported("UnsupportedShape: factors must be quaternion or split");
    if (Hp) out.H_plus = *Hp;
    if (Hm) out.H_minus = *Hm;
    // containment: one component is Q
    VerdictKind contains = VerdictKind::no;
    for (const auto& H : {Hp, Hm}) {
      if (!H) continue;
      std::optional<IsometryWitness> w;
      const VerdictKind k = quat_isomorphic(*H, Q, height, &w);
      if (k == VerdictKind::yes) {
        contains = VerdictKind::yes;
        out.component_witness = w;
        break;
      }
      if (k == VerdictKind::unknown) contains = VerdictKind::unknown;
    }
    out.contains_Q = contains;
    // a split component makes the pair hyperbolic
    bool split_component = lsplit || rsplit;
    bool all_division = true;
    for (const auto& H : {Hp, Hm}) {
      if (!H) continue;
      const auto d = is_division(*H, height);
      if (d.kind == VerdictKind::no) split_component = true;
      if (d.kind != VerdictKind::yes) all_division = false;
    }
    if (split_component) {
      out.hyperbolic_over_F = true;
      if (auto e = pair_hyperbolic(P, height); e.is_yes()) out.idempotent = *e.witness;
      return finish(VerdictKind::yes, Cert::none, "a Clifford component is split: hyperbolic");
    }
    if (contains == VerdictKind::yes) return finish(VerdictKind::yes, Cert::none, "contains (Q, bar)");
    if (contains == VerdictKind::no && all_division)
      return finish(VerdictKind::no, Cert::structural, "no Clifford component is split or isomorphic to Q");
    return finish(VerdictKind::unknown, Cert::none, "Clifford components not settled");
  }

  if (auto H = brauer_quat(P.expr())) {
    if (quat_isomorphic(*H, Q, height) == VerdictKind::yes) {
      out.shape = PairShape::brauer_Q;
      const auto e = pair_hyperbolic(P, height);
      if (e.is_yes()) {
        out.hyperbolic_over_F = true;
        out.idempotent = *e.witness;
        out.contains_Q = VerdictKind::yes;
        return finish(VerdictKind::yes, Cert::none, "hyperbolic over F, contains (Q, bar)");
      }
      if (e.is_no()) return finish(VerdictKind::no, e.cert, "not hyperbolic over F");
      return finish(VerdictKind::unknown, Cert::none, e.detail);
    }
  }
  throw unsupported("UnsupportedShape: " + P.to_string());
}

}  // namespace qfc2
