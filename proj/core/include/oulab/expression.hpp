#pragma once

#include "oulab/types.hpp"

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oulab {

/// Small arithmetic expression language used by the JSON coefficient specs.
///
/// Grammar (usual precedence, left associative except `^`):
///   expr   := term (('+'|'-') term)*
///   term   := unary (('*'|'/') unary)*
///   unary  := ('-'|'+') unary | power
///   power  := atom ('^' unary)?
///   atom   := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
///
/// Functions: sin, cos, exp, log, sqrt, abs, min, max. Variables are bound by
/// name at parse time. Expressions are immutable and cheap to copy.
class Expression {
 public:
  struct Node;

  Expression();  // the constant 0

  static Expression parse(std::string_view text, const std::vector<std::string>& variables);
  static Expression constant(double value);
  static Expression variable(int index);

  /// Convenience variable lists: {"s"} and {"s", "x1", ..., "xN"}.
  /// When N == 1 the name "x" is accepted as an alias of "x1".
  static std::vector<std::string> time_variables();
  static std::vector<std::string> space_time_variables(int n);

  [[nodiscard]] double operator()(std::span<const double> vars) const;
  [[nodiscard]] double at(double s) const;
  [[nodiscard]] double at(double s, const Vector& x) const;

  /// Symbolic partial derivative with respect to variable `index`.
  [[nodiscard]] Expression derivative(int index) const;

  [[nodiscard]] bool is_constant() const;
  [[nodiscard]] std::string to_string() const;

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a);

 private:
  explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

}  // namespace oulab
