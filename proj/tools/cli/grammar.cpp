#include "grammar.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace qfc2::cli {

ParseError::ParseError(size_t line, size_t column, const std::string& message)
    : Error(Kind::parse_error,
            "ParseError at line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

bool Bindings::defines(const std::string& name) const {
  return scalars.count(name) || forms.count(name) || quats.count(name) || algebras.count(name);
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Parser {
 public:
  Parser(Field f, std::string_view s, const Bindings& b) : f_(f), s_(s), b_(b) {}

  [[noreturn]] void fail(const std::string& msg) const { fail_at(pos_, msg); }
  [[noreturn]] void fail_at(size_t at, const std::string& msg) const {
    size_t line = 1, col = 1;
    for (size_t i = 0; i < at && i < s_.size(); ++i) {
      if (s_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(line, col, msg);
  }

  void ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(std::string_view tok) {
    ws();
    return s_.substr(pos_, tok.size()) == tok;
  }
  bool accept(std::string_view tok) {
    if (!peek(tok)) return false;
    pos_ += tok.size();
    return true;
  }
  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }
  void finish() {
    ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
  }
  std::string peek_ident() {
    ws();
    size_t e = pos_;
    if (e < s_.size() && ident_start(s_[e]))
      while (e < s_.size() && ident_char(s_[e])) ++e;
    return std::string(s_.substr(pos_, e - pos_));
  }
  /// Identifier not followed by further identifier characters.
  bool accept_word(std::string_view w) {
    if (peek_ident() != w) return false;
    pos_ += w.size();
    return true;
  }
  size_t pos() const { return pos_; }
  void reset(size_t p) { pos_ = p; }

  // ---- scalars

  Value scalar() {
    Value v = product();
    while (accept("+") || accept("-")) v += product();
    return v;
  }
  Value product() {
    Value v = power();
    for (;;) {
      if (peek("*") && !starts_form_after_star()) {
        accept("*");
        v *= power();
      } else if (accept("/")) {
        const size_t at = pos_;
        const Value d = power();
        if (d.is_zero()) fail_at(at, "division by zero");
        v = v / d;
      } else {
        return v;
      }
    }
  }
  Value power() {
    Value v = primary();
    if (accept("^")) {
      ws();
      const size_t at = pos_;
      uint64_t e = 0;
      const auto* begin = s_.data() + pos_;
      const auto [end, ec] = std::from_chars(begin, s_.data() + s_.size(), e);
      if (ec != std::errc() || end == begin) fail_at(at, "expected an exponent");
      pos_ += static_cast<size_t>(end - begin);
      v = v.pow(e);
    }
    return v;
  }
  Value primary() {
    ws();
    if (pos_ >= s_.size()) fail("expected a scalar");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Value v = scalar();
      expect(")");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      uint64_t n = 0;
      const auto [end, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), n);
      if (ec != std::errc()) fail("bad number");
      pos_ = static_cast<size_t>(end - s_.data());
      return Value::constant(f_, static_cast<uint32_t>(n & 1u));
    }
    if (ident_start(c)) {
      const size_t at = pos_;
      const std::string id = peek_ident();
      pos_ += id.size();
      for (const std::string& v : f_->variables())
        if (v == id) return Value::variable(f_, id);
      if (id == "w") {
        if (f_->k < 2) fail_at(at, "'w' needs a constant field larger than GF(2)");
        return Value::constant(f_, 2);
      }
      if (auto it = b_.scalars.find(id); it != b_.scalars.end()) return it->second;
      fail_at(at, "UnknownVariable: '" + id + "'");
    }
    fail("expected a scalar");
  }
  std::vector<Value> scalar_list() {
    std::vector<Value> out{scalar()};
    while (accept(",")) out.push_back(scalar());
    return out;
  }

  // ---- forms

  /// After '*', does a form atom follow? Scalars never start with '[' or '<'.
  bool starts_form_after_star() {
    const size_t save = pos_;
    accept("*");
    const bool r = starts_form_atom();
    pos_ = save;
    return r;
  }
  bool starts_form_atom() {
    ws();
    if (pos_ >= s_.size()) return false;
    const char c = s_[pos_];
    if (c == '[' || c == '<') return true;
    const std::string id = peek_ident();
    return id == "gram" || (id == "H" && !is_variable(id)) || b_.forms.count(id) > 0;
  }
  bool is_variable(const std::string& id) const {
    for (const std::string& v : f_->variables())
      if (v == id) return true;
    return false;
  }

  QuadraticForm form() {
    QuadraticForm q = form_term();
    while (accept("+")) q = q.orth(form_term());
    return q;
  }
  QuadraticForm form_term() {
    Value scale = Value::one(f_);
    for (;;) {
      if (starts_form_atom()) return form_atom().scaled(scale);
      ws();
      if (pos_ < s_.size() && s_[pos_] == '(') {
        // a parenthesized scalar factor or a parenthesized form
        const size_t save = pos_;
        try {
          const Value v = power();
          if (accept("*")) {
            scale *= v;
            continue;
          }
          if (accept("/")) {
            scale = scale / divisor();
            continue;
          }
        } catch (const ParseError&) {
        }
        pos_ = save;
        expect("(");
        QuadraticForm q = form();
        expect(")");
        return q.scaled(scale);
      }
      scale *= power();
      if (accept("/")) {
        scale = scale / divisor();
        continue;
      }
      if (!accept("*")) fail("expected '*' and a form");
    }
  }
  Value divisor() {
    const size_t at = pos_;
    const Value d = power();
    if (d.is_zero()) fail_at(at, "division by zero");
    if (!accept("*")) fail("expected '*' and a form");
    return d;
  }
  QuadraticForm form_atom() {
    const size_t at = pos_;
    if (accept("<<")) {
      std::vector<Value> xs = scalar_list();
      if (accept("]]")) {
        const Value c = xs.back();
        xs.pop_back();
        return QuadraticForm::pfister(f_, xs, c);
      }
      if (accept(">>")) {
        const BilinearForm b = BilinearForm::pfister(f_, xs);
        Vec d;
        for (size_t i = 0; i < b.dim(); ++i) d.push_back(b.gram()(i, i));
        return QuadraticForm::diagonal(f_, d);
      }
      fail("expected ']]' or '>>'");
    }
    if (accept("<")) {
      if (accept(">")) return QuadraticForm::zero(f_, 0);
      const std::vector<Value> xs = scalar_list();
      expect(">");
      return QuadraticForm::diagonal(f_, xs);
    }
    if (accept("[")) {
      const Value a = scalar();
      expect(",");
      const Value b = scalar();
      if (peek(")")) fail("a quaternion algebra is not a form");
      expect("]");
      return QuadraticForm::block(a, b);
    }
    if (accept_word("gram")) {
      expect("[");
      std::vector<Vec> rows;
      do {
        expect("[");
        rows.push_back(scalar_list());
        expect("]");
      } while (accept(","));
      expect("]");
      for (const Vec& r : rows)
        if (r.size() != rows.size()) fail_at(at, "gram matrix is not square");
      return QuadraticForm(Matrix::from_rows(f_, rows));
    }
    const std::string id = peek_ident();
    if (auto it = b_.forms.find(id); it != b_.forms.end()) {
      pos_ += id.size();
      return it->second;
    }
    if (id == "H") {
      pos_ += 1;
      return QuadraticForm::hyperbolic(f_);
    }
    fail("expected a form");
  }

  // ---- quaternions and algebras

  bool starts_quat() {
    ws();
    if (peek("quat[")) return true;
    if (b_.quats.count(peek_ident())) return true;
    if (!peek("[")) return false;
    // '[' a ',' b ')'
    const size_t save = pos_;
    bool r = false;
    try {
      accept("[");
      scalar();
      expect(",");
      scalar();
      r = peek(")");
    } catch (const ParseError&) {
    }
    pos_ = save;
    return r;
  }
  Quat quat() {
    const std::string id = peek_ident();
    if (auto it = b_.quats.find(id); it != b_.quats.end() && id != "quat") {
      pos_ += id.size();
      return it->second;
    }
    accept_word("quat");
    expect("[");
    const Value r = scalar();
    expect(",");
    const Value s = scalar();
    expect(")");
    return QuaternionAlgebra::make(r, s);
  }

  struct Item {
    Expr expr;
    std::optional<QuadraticForm> form;  // 'Ad' form
  };

  Expr algebra() {
    Expr e = aterm().expr;
    while (accept("(x)")) e = AlgebraExpression::tensor(e, aterm().expr);
    return e;
  }
  Item aterm() {
    ws();
    const size_t at = pos_;
    if (starts_quat()) return {AlgebraExpression::quat(quat()), std::nullopt};
    if (accept("(")) {
      Expr e = algebra();
      expect(")");
      return {e, std::nullopt};
    }
    const std::string id = peek_ident();
    if (id == "F" && !is_variable(id) && !b_.defines(id)) {
      pos_ += 1;
      return {AlgebraExpression::base(f_), std::nullopt};
    }
    if (auto it = b_.algebras.find(id); it != b_.algebras.end()) {
      pos_ += id.size();
      return {it->second, std::nullopt};
    }
    if (id.size() > 1 && id[0] == 'M' && std::all_of(id.begin() + 1, id.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      pos_ += id.size();
      const size_t n = std::stoul(id.substr(1));
      if (n == 0) fail_at(at, "matrix size must be positive");
      expect("(");
      Expr inner = algebra();
      expect(")");
      return {AlgebraExpression::matrix(n, inner), std::nullopt};
    }
    if (id == "Int") {
      pos_ += 3;
      expect("(");
      Vec x = scalar_list();
      expect(")");
      expect("*");
      Expr inner = aterm().expr;
      return {AlgebraExpression::twist(inner, std::move(x)), std::nullopt};
    }
    if (id == "Ad") {
      pos_ += 2;
      if (peek("<") && !peek("<<")) {
        accept("<");
        const Vec d = scalar_list();
        expect(">");
        return {AlgebraExpression::adjoint(BilinearForm::diagonal(f_, d)), std::nullopt};
      }
      if (peek("(")) {
        const size_t save = pos_;
        accept("(");
        if (accept_word("gram")) {
          std::vector<Vec> rows;
          while (accept("[")) {
            rows.push_back(scalar_list());
            expect("]");
          }
          expect(")");
          for (const Vec& r : rows)
            if (r.size() != rows.size()) fail_at(at, "gram matrix is not square");
          return {AlgebraExpression::adjoint(BilinearForm(Matrix::from_rows(f_, rows))), std::nullopt};
        }
        pos_ = save;
      }
      const QuadraticForm q = form();
      return {AlgebraExpression::adjoint(q.polar()), q};
    }
    fail("expected an algebra");
  }

  QuadraticPair pair() {
    std::vector<Item> items{aterm()};
    std::vector<std::string> ops;
    const size_t at = pos_;
    for (;;) {
      if (accept("(x)")) {
        ops.push_back("(x)");
      } else if (accept_word("box")) {
        ops.push_back("box");
      } else {
        break;
      }
      items.push_back(aterm());
    }
    size_t k = items.size();
    std::optional<QuadraticPair> P;
    if (!ops.empty() && ops.back() == "box") {
      P = boxtimes(items[k - 2].expr, items[k - 1].expr);
      k -= 2;
    } else {
      if (!items.back().form) fail_at(at, "a pair ends with 'Ad' form or 'A box B'");
      P = adjoint_pair(*items.back().form);
      k -= 1;
    }
    while (k > 0) {
      if (ops[k - 1] != "(x)") fail_at(at, "'box' takes two algebra operands");
      P = tensor_pair(items[k - 1].expr, *P);
      --k;
    }
    return *P;
  }

 private:
  Field f_;
  std::string_view s_;
  const Bindings& b_;
  size_t pos_ = 0;
};

template <class Fn>
auto parse_all(Field f, std::string_view text, const Bindings& b, Fn fn) {
  Parser p(f, text, b);
  auto out = fn(p);
  p.finish();
  return out;
}

}  // namespace

Field parse_field(std::string_view text) {
  Parser p(gf(1), text, Bindings{});
  if (!p.accept("gf")) p.fail("field must start with 'gf'");
  int k = 0;
  if (p.accept("(")) {
    p.expect("2^");
    p.ws();
    const size_t at = p.pos();
    const auto [end, ec] = std::from_chars(text.data() + at, text.data() + text.size(), k);
    if (ec != std::errc() || k < 1 || k > 16) p.fail_at(at, "expected 1 <= k <= 16");
    p.reset(static_cast<size_t>(end - text.data()));
    p.expect(")");
  } else {
    const size_t at = p.pos();
    uint32_t q = 0;
    const auto [end, ec] = std::from_chars(text.data() + at, text.data() + text.size(), q);
    if (ec != std::errc() || q < 2 || (q & (q - 1)) != 0 || q > 65536) p.fail_at(at, "expected a power of 2");
    while ((1u << k) < q) ++k;
    p.reset(static_cast<size_t>(end - text.data()));
  }
  Field f = gf(k);
  if (p.accept("(")) {
    std::set<std::string> seen;
    do {
      const size_t at = p.pos();
      const std::string v = p.peek_ident();
      if (v.empty()) p.fail("expected a variable name");
      if (v == "w" || v == "F" || v == "H" || v == "box" || v == "gram" || v == "quat" || v == "Ad" || v == "Int")
        p.fail_at(at, "'" + v + "' is reserved");
      if (!seen.insert(v).second) p.fail_at(at, "variable '" + v + "' repeated");
      if (seen.size() > 4) p.fail_at(at, "at most 4 variables");
      p.reset(at + v.size());
      f = rational(f, v);
    } while (p.accept(","));
    p.expect(")");
  }
  p.finish();
  return f;
}

Value parse_scalar(Field f, std::string_view text, const Bindings& b) {
  return parse_all(f, text, b, [](Parser& p) { return p.scalar(); });
}

Vec parse_vector(Field f, std::string_view text, const Bindings& b) {
  return parse_all(f, text, b, [](Parser& p) { return p.scalar_list(); });
}

QuadraticForm parse_form(Field f, std::string_view text, const Bindings& b) {
  return parse_all(f, text, b, [](Parser& p) { return p.form(); });
}

Quat parse_quat(Field f, std::string_view text, const Bindings& b) {
  return parse_all(f, text, b, [](Parser& p) { return p.quat(); });
}

Expr parse_algebra(Field f, std::string_view text, const Bindings& b) {
  return parse_all(f, text, b, [](Parser& p) { return p.algebra(); });
}

QuadraticPair parse_pair(Field f, std::string_view text, const Bindings& b) {
  return parse_all(f, text, b, [](Parser& p) { return p.pair(); });
}

std::string print_quat(const Quat& Q) { return "quat[" + Q->r().to_string() + "," + Q->s().to_string() + ")"; }

}  // namespace qfc2::cli
