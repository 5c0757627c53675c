#pragma once

// Scalar fields in chart coordinates u1, u2 from a closed grammar:
//
//   expr   := term (('+' | '-') term)*
//   term   := unary ('*' unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' integer)?
//   atom   := number | 'u1' | 'u2' | 'exp' '(' expr ')' | '(' expr ')'
//
// Every production is closed under differentiation, so the gradient is exact.

#include <memory>
#include <string>

#include <Eigen/Dense>

namespace otlab::tools {

struct ValueGrad {
  double value = 0.0;
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
};

class Expression {
 public:
  /// Throws otlab::Error(ConfigError) naming the column of the first bad token.
  static Expression parse(const std::string& text);

  ValueGrad eval(const Eigen::Vector2d& u) const;
  double value(const Eigen::Vector2d& u) const { return eval(u).value; }
  Eigen::Vector2d gradient(const Eigen::Vector2d& u) const { return eval(u).grad; }
  bool is_constant() const noexcept;
  const std::string& text() const noexcept { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace otlab::tools
