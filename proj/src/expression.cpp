#include "sphflow/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <vector>

namespace sphflow {

struct Expression::Node {
  enum class Kind { kConst, kVar, kUnary, kBinary } kind;
  double value = 0.0;                       // kConst
  std::function<double(double)> fn1;        // kUnary
  std::function<double(double, double)> fn2;  // kBinary
  std::shared_ptr<const Node> a, b;

  double eval(double r) const {
    switch (kind) {
      case Kind::kConst: return value;
      case Kind::kVar: return r;
      case Kind::kUnary: return fn1(a->eval(r));
      case Kind::kBinary: return fn2(a->eval(r), b->eval(r));
    }
    return 0.0;  // unreachable
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kConst;
  n->value = v;
  return n;
}

NodePtr make_var() {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kVar;
  return n;
}

NodePtr make_unary(std::function<double(double)> f, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kUnary;
  n->fn1 = std::move(f);
  n->a = std::move(a);
  return n;
}

NodePtr make_binary(std::function<double(double, double)> f, NodePtr a,
                    NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kBinary;
  n->fn2 = std::move(f);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  NodePtr run() {
    NodePtr e = sum();
    skip_ws();
    if (pos_ != s_.size())
      fail("unexpected trailing input at position " + std::to_string(pos_));
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ExpressionError("expression \"" + s_ + "\": " + why);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr sum() {
    NodePtr e = term();
    for (;;) {
      if (consume('+'))
        e = make_binary([](double x, double y) { return x + y; }, e, term());
      else if (consume('-'))
        e = make_binary([](double x, double y) { return x - y; }, e, term());
      else
        return e;
    }
  }

  NodePtr term() {
    NodePtr e = factor();
    for (;;) {
      if (consume('*'))
        e = make_binary([](double x, double y) { return x * y; }, e, factor());
      else if (consume('/'))
        e = make_binary([](double x, double y) { return x / y; }, e, factor());
      else
        return e;
    }
  }

  NodePtr factor() {
    if (consume('-'))
      return make_unary([](double x) { return -x; }, factor());
    if (consume('+')) return factor();
    NodePtr base = power_base();
    if (consume('^'))
      return make_binary([](double x, double y) { return std::pow(x, y); },
                         base, factor());  // right-associative
    return base;
  }

  NodePtr power_base() {
    skip_ws();
    const char c = peek();
    if (c == '(') {
      consume('(');
      NodePtr e = sum();
      if (!consume(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    skip_ws();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("bad numeric literal");
    pos_ += static_cast<std::size_t>(end - begin);
    return make_const(v);
  }

  NodePtr identifier() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
            s_[pos_] == '_'))
      ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    if (name == "r") return make_var();
    if (name == "pi") return make_const(M_PI);
    if (name == "e") return make_const(M_E);

    static const std::vector<std::pair<std::string, double (*)(double)>> fns1 =
        {{"exp", std::exp},  {"ln", std::log},   {"log", std::log},
         {"sqrt", std::sqrt}, {"sin", std::sin},  {"cos", std::cos},
         {"tan", std::tan},  {"tanh", std::tanh}, {"abs", std::fabs}};
    for (const auto& [fname, fp] : fns1) {
      if (name == fname) {
        if (!consume('(')) fail(name + ": expected '('");
        NodePtr a = sum();
        if (!consume(')')) fail(name + ": missing ')'");
        return make_unary(fp, a);
      }
    }
    static const std::vector<std::pair<std::string, double (*)(double, double)>>
        fns2 = {{"pow", std::pow}, {"min", std::fmin}, {"max", std::fmax}};
    for (const auto& [fname, fp] : fns2) {
      if (name == fname) {
        if (!consume('(')) fail(name + ": expected '('");
        NodePtr a = sum();
        if (!consume(',')) fail(name + ": expected ','");
        NodePtr b = sum();
        if (!consume(')')) fail(name + ": missing ')'");
        return make_binary(fp, a, b);
      }
    }
    fail("unknown identifier '" + name + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).run();
  e.text_ = text;
  return e;
}

double Expression::operator()(double r) const {
  if (!root_) throw ExpressionError("empty expression");
  return root_->eval(r);
}

}  // namespace sphflow
