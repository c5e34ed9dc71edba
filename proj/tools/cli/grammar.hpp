#pragma once

// Text syntax for fields, scalars, forms, quaternion algebras, algebra expressions and
// quadratic pairs.
//
//   field   := ('gf' N | 'gf(2^' k ')') ['(' var {',' var} ')']
//   scalar  := sum of products of powers of numbers, variables, 'w', names, '(' scalar ')'
//   form    := term {'+' term};  term := {factor ('*'|'/')} atom
//   atom    := '[' s ',' s ']' | '<' s {',' s} '>' | '<>' | '<<' s {',' s} (']]' | '>>')
//            | 'H' | 'gram[[..],..]' | '(' form ')' | name
//   quat    := 'quat[' s ',' s ')' | '[' s ',' s ')' | name
//   alg     := aterm {'(x)' aterm}
//   aterm   := 'F' | quat | 'M'n '(' alg ')' | 'Ad<' s {',' s} '>' | 'Ad(gram[..]..)'
//            | 'Ad' form | 'Int(' s {',' s} ')*' aterm | '(' alg ')' | name
//   pair    := 'Ad' form | aterm 'box' aterm | aterm '(x)' pair

#include <map>
#include <string>
#include <string_view>

#include "qfc2/pairs.hpp"

namespace qfc2::cli {

class ParseError : public Error {
 public:
  ParseError(size_t line, size_t column, const std::string& message);
  size_t line() const noexcept { return line_; }
  size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  size_t line_, column_;
  std::string message_;
};

struct Bindings {
  std::map<std::string, Value> scalars;
  std::map<std::string, QuadraticForm> forms;
  std::map<std::string, Quat> quats;
  std::map<std::string, Expr> algebras;

  bool defines(const std::string& name) const;
};

Field parse_field(std::string_view text);

Value parse_scalar(Field f, std::string_view text, const Bindings& b = {});
Vec parse_vector(Field f, std::string_view text, const Bindings& b = {});
QuadraticForm parse_form(Field f, std::string_view text, const Bindings& b = {});
Quat parse_quat(Field f, std::string_view text, const Bindings& b = {});
Expr parse_algebra(Field f, std::string_view text, const Bindings& b = {});
QuadraticPair parse_pair(Field f, std::string_view text, const Bindings& b = {});

/// Text that parses back to an equal quaternion algebra.
std::string print_quat(const Quat& Q);

}  // namespace qfc2::cli
