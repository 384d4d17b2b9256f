#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace sphflow {

struct ExpressionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Arithmetic expression in a single variable `r`.
//
// Grammar: + - * / ^ (right-assoc), parentheses, unary minus, numeric
// literals, constants pi and e, and the functions exp, ln, log, sqrt, sin,
// cos, tan, tanh, abs, pow(x,y), min(x,y), max(x,y).
class Expression {
 public:
  static Expression parse(const std::string& text);

  double operator()(double r) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace sphflow
