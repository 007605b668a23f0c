#pragma once

// Closed-form expressions in x and y for exponent fields, weights and
// initial data. Grammar:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | x | y | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// with name in {sin, cos, exp, abs, min, max}.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "vexspec/grid.hpp"

namespace vexspec {

class Expression {
public:
  /// Throws ParseError with the 1-based column of the offending token.
  static Expression parse(std::string_view text);

  /// Throws DomainError on division by zero or a non-finite result.
  double operator()(double x, double y = 0.0) const;

  const std::string& text() const noexcept { return text_; }
  bool uses_y() const noexcept { return uses_y_; }

  struct Node;

private:
  std::string text_;
  std::shared_ptr<const Node> root_;
  bool uses_y_ = false;
};

/// Evaluates at every cell midpoint.
CellField expression_eval(std::string_view expr, const StructuredGrid& g);
/// Evaluates at every node; boundary nodes are set to zero.
GridFunction expression_nodes(std::string_view expr, const StructuredGrid& g);

}  // namespace vexspec
