#include "otlab_tools/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "otlab/error.hpp"

namespace otlab::tools {

struct Expression::Node {
  enum class Op { Const, U1, U2, Add, Sub, Mul, Neg, Exp, Pow } op = Op::Const;
  double value = 0.0;
  int power = 0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    raise(ErrorKind::ConfigError, "expression column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept_word(const char* w) {
    skip();
    const std::string word(w);
    if (s_.compare(pos_, word.size(), word) != 0) return false;
    const std::size_t end = pos_ + word.size();
    if (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) return false;
    pos_ = end;
    return true;
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (accept('+')) {
        e = make(Op::Add, e, term());
      } else if (accept('-')) {
        e = make(Op::Sub, e, term());
      } else {
        return e;
      }
    }
  }

  NodePtr term() {
    NodePtr e = unary();
    while (accept('*')) e = make(Op::Mul, e, unary());
    return e;
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (!accept('^')) return base;
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("exponent must be a nonnegative integer");
    const long p = std::strtol(s_.substr(start, pos_ - start).c_str(), nullptr, 10);
    if (p > 64) fail("exponent above 64");
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Pow;
    n->power = static_cast<int>(p);
    n->lhs = std::move(base);
    return n;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    if (accept('(')) {
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (accept_word("u1")) return make(Op::U1);
    if (accept_word("u2")) return make(Op::U2);
    if (accept_word("exp")) {
      if (!accept('(')) fail("expected '(' after exp");
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return make(Op::Exp, e);
    }
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || !(std::isdigit(static_cast<unsigned char>(*begin)) || *begin == '.')) {
      fail("expected a number, u1, u2, exp or '('");
    }
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

ValueGrad eval_node(const Expression::Node& n, const Eigen::Vector2d& u) {
  ValueGrad r;
  switch (n.op) {
    case Op::Const: r.value = n.value; break;
    case Op::U1: r.value = u.x(); r.grad = {1.0, 0.0}; break;
    case Op::U2: r.value = u.y(); r.grad = {0.0, 1.0}; break;
    case Op::Add: {
      const ValueGrad a = eval_node(*n.lhs, u), b = eval_node(*n.rhs, u);
      r.value = a.value + b.value;
      r.grad = a.grad + b.grad;
      break;
    }
    case Op::Sub: {
      const ValueGrad a = eval_node(*n.lhs, u), b = eval_node(*n.rhs, u);
      r.value = a.value - b.value;
      r.grad = a.grad - b.grad;
      break;
    }
    case Op::Mul: {
      const ValueGrad a = eval_node(*n.lhs, u), b = eval_node(*n.rhs, u);
      r.value = a.value * b.value;
      r.grad = a.grad * b.value + b.grad * a.value;
      break;
    }
    case Op::Neg: {
      const ValueGrad a = eval_node(*n.lhs, u);
      r.value = -a.value;
      r.grad = -a.grad;
      break;
    }
    case Op::Exp: {
      const ValueGrad a = eval_node(*n.lhs, u);
      r.value = std::exp(a.value);
      r.grad = a.grad * r.value;
      break;
    }
    case Op::Pow: {
      const ValueGrad a = eval_node(*n.lhs, u);
      if (n.power == 0) {
        r.value = 1.0;
        break;
      }
      double lower = 1.0;  // a^{p-1}
      for (int k = 1; k < n.power; ++k) lower *= a.value;
      r.value = lower * a.value;
      r.grad = a.grad * (n.power * lower);
      break;
    }
  }
  return r;
}

bool constant_node(const Expression::Node& n) {
  switch (n.op) {
    case Op::Const: return true;
    case Op::U1:
    case Op::U2: return false;
    default: break;
  }
  return (!n.lhs || constant_node(*n.lhs)) && (!n.rhs || constant_node(*n.rhs));
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).parse();
  e.text_ = text;
  return e;
}

ValueGrad Expression::eval(const Eigen::Vector2d& u) const { return eval_node(*root_, u); }

bool Expression::is_constant() const noexcept { return constant_node(*root_); }

}  // namespace otlab::tools
