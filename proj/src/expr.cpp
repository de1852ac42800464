#include "lef/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <type_traits>

#include "lef/errors.hpp"

namespace lef {

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  ExprTree run() {
    tree_.root_ = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return std::move(tree_);
  }

 private:
  using Op = ExprTree::Op;

  std::string_view src_;
  std::size_t pos_ = 0;
  ExprTree tree_;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  int push(ExprTree::Node node) {
    tree_.nodes_.push_back(node);
    return static_cast<int>(tree_.nodes_.size()) - 1;
  }

  int binary(Op op, int lhs, int rhs) { return push({op, 0.0, lhs, rhs}); }
  int unary(Op op, int arg) { return push({op, 0.0, arg, -1}); }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Op::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = binary(Op::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_factor();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Op::Mul, lhs, parse_factor());
      } else if (accept('/')) {
        lhs = binary(Op::Div, lhs, parse_factor());
      } else {
        return lhs;
      }
    }
  }

  int parse_factor() {
    const int base = parse_base();
    if (accept('^')) return binary(Op::Pow, base, parse_factor());
    return base;
  }

  int parse_base() {
    const char c = peek();
    if (c == '\0') fail("unexpected end of expression");
    if (c == '-') {
      ++pos_;
      return unary(Op::Negate, parse_factor());
    }
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  int parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) {
        pos_ = mark;
        fail("malformed exponent");
      }
    }
    double value = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (res.ec != std::errc{} || res.ptr != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return push({Op::Constant, value, -1, -1});
  }

  int parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "r") return push({Op::VarR, 0.0, -1, -1});
    if (name == "theta") return push({Op::VarTheta, 0.0, -1, -1});

    Op op;
    if (name == "ln") {
      op = Op::Ln;
    } else if (name == "exp") {
      op = Op::Exp;
    } else if (name == "sin") {
      op = Op::Sin;
    } else if (name == "cos") {
      op = Op::Cos;
    } else {
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "'");
    }
    if (!accept('(')) fail("expected '(' after " + std::string(name));
    const int arg = parse_expr();
    if (!accept(')')) fail("expected ')'");
    return unary(op, arg);
  }
};

ExprTree parse_expr(std::string_view source) { return ExprParser(source).run(); }

double ExprTree::evaluate(double r, double theta) const { return eval_node(root_, r, theta); }

double ExprTree::eval_node(int index, double r, double theta) const {
  const Node& n = nodes_[index];
  switch (n.op) {
    case Op::Constant: return n.value;
    case Op::VarR: return r;
    case Op::VarTheta: return theta;
    case Op::Negate: return -eval_node(n.lhs, r, theta);
    case Op::Ln: return std::log(eval_node(n.lhs, r, theta));
    case Op::Exp: return std::exp(eval_node(n.lhs, r, theta));
    case Op::Sin: return std::sin(eval_node(n.lhs, r, theta));
    case Op::Cos: return std::cos(eval_node(n.lhs, r, theta));
    case Op::Add: return eval_node(n.lhs, r, theta) + eval_node(n.rhs, r, theta);
    case Op::Sub: return eval_node(n.lhs, r, theta) - eval_node(n.rhs, r, theta);
    case Op::Mul: return eval_node(n.lhs, r, theta) * eval_node(n.rhs, r, theta);
    case Op::Div: return eval_node(n.lhs, r, theta) / eval_node(n.rhs, r, theta);
    case Op::Pow: return std::pow(eval_node(n.lhs, r, theta), eval_node(n.rhs, r, theta));
  }
  return 0.0;
}

bool ExprTree::node_uses_theta(int index) const {
  const Node& n = nodes_[index];
  if (n.op == Op::VarTheta) return true;
  return (n.lhs >= 0 && node_uses_theta(n.lhs)) || (n.rhs >= 0 && node_uses_theta(n.rhs));
}

bool ExprTree::node_uses_r(int index) const {
  const Node& n = nodes_[index];
  if (n.op == Op::VarR) return true;
  return (n.lhs >= 0 && node_uses_r(n.lhs)) || (n.rhs >= 0 && node_uses_r(n.rhs));
}

Eigen::ArrayXd ExprTree::evaluate_on_circle(double r, const Eigen::ArrayXd& theta) const {
  return eval_circle(root_, r, theta);
}

namespace {

// Elementwise node application with std:: functions, so values match the
// scalar evaluator bit for bit.
Eigen::ArrayXd apply_unary(ExprTree::Op op, const Eigen::ArrayXd& x) {
  using Op = ExprTree::Op;
  auto map = [&](double (*fn)(double)) -> Eigen::ArrayXd {
    return x.unaryExpr([fn](double v) { return fn(v); });
  };
  switch (op) {
    case Op::Negate: return -x;
    case Op::Ln: return map(std::log);
    case Op::Exp: return map(std::exp);
    case Op::Sin: return map(std::sin);
    case Op::Cos: return map(std::cos);
    default: return x;
  }
}

template <class A, class B>
Eigen::ArrayXd apply_binary(ExprTree::Op op, const A& a, const B& b) {
  using Op = ExprTree::Op;
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    default: break;
  }
  if constexpr (std::is_same_v<A, double>) {
    return b.unaryExpr([a](double x) { return std::pow(a, x); });
  } else if constexpr (std::is_same_v<B, double>) {
    return a.unaryExpr([b](double x) { return std::pow(x, b); });
  } else {
    return a.binaryExpr(b, [](double x, double y) { return std::pow(x, y); });
  }
}

bool is_unary(ExprTree::Op op) {
  using Op = ExprTree::Op;
  return op == Op::Negate || op == Op::Ln || op == Op::Exp || op == Op::Sin || op == Op::Cos;
}

}  // namespace

Eigen::ArrayXd ExprTree::eval_circle(int index, double r, const Eigen::ArrayXd& theta) const {
  const Node& n = nodes_[index];
  if (!node_uses_theta(index)) {
    return Eigen::ArrayXd::Constant(theta.size(), eval_node(index, r, 0.0));
  }
  if (n.op == Op::VarTheta) return theta;
  if (is_unary(n.op)) return apply_unary(n.op, eval_circle(n.lhs, r, theta));
  const bool lv = node_uses_theta(n.lhs);
  const bool rv = node_uses_theta(n.rhs);
  if (!rv) return apply_binary(n.op, eval_circle(n.lhs, r, theta), eval_node(n.rhs, r, 0.0));
  if (!lv) return apply_binary(n.op, eval_node(n.lhs, r, 0.0), eval_circle(n.rhs, r, theta));
  return apply_binary(n.op, eval_circle(n.lhs, r, theta), eval_circle(n.rhs, r, theta));
}

CircleSampler::CircleSampler(std::shared_ptr<const ExprTree> tree, int n)
    : tree_(std::move(tree)) {
  const double step = 2.0 * std::numbers::pi / n;
  theta_ = Eigen::ArrayXd::LinSpaced(n, 0, n - 1) * step;
  const auto& nodes = tree_->nodes();
  kind_.resize(nodes.size());
  table_.resize(nodes.size());
  // Children precede parents in the node array.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const ExprTree::Node& node = nodes[i];
    Kind k = Kind::Scalar;
    if (node.op == ExprTree::Op::VarTheta) {
      k = Kind::AngleOnly;
    } else if (node.op == ExprTree::Op::VarR) {
      k = Kind::Scalar;
    } else {
      bool angle = false;
      bool radius = false;
      for (int c : {node.lhs, node.rhs}) {
        if (c < 0) continue;
        if (kind_[c] != Kind::Scalar) angle = true;
        if (kind_[c] == Kind::Mixed || (kind_[c] == Kind::Scalar && tree_->node_uses_r(c))) {
          radius = true;
        }
      }
      k = angle ? (radius ? Kind::Mixed : Kind::AngleOnly) : Kind::Scalar;
    }
    kind_[i] = k;
    if (k == Kind::AngleOnly) table_[i] = eval_theta_only(static_cast<int>(i));
  }
}

Eigen::ArrayXd CircleSampler::eval_theta_only(int index) const {
  return tree_->eval_circle(index, 1.0, theta_);
}

Eigen::ArrayXd CircleSampler::evaluate(double r) const { return eval(tree_->root(), r); }

Eigen::ArrayXd CircleSampler::eval(int index, double r) const {
  const ExprTree::Node& n = tree_->nodes()[index];
  switch (kind_[index]) {
    case Kind::Scalar:
      return Eigen::ArrayXd::Constant(theta_.size(), tree_->eval_node(index, r, 0.0));
    case Kind::AngleOnly: return table_[index];
    case Kind::Mixed: break;
  }
  if (is_unary(n.op)) return apply_unary(n.op, eval(n.lhs, r));
  const bool ls = kind_[n.lhs] == Kind::Scalar;
  const bool rs = kind_[n.rhs] == Kind::Scalar;
  if (rs) return apply_binary(n.op, eval(n.lhs, r), tree_->eval_node(n.rhs, r, 0.0));
  if (ls) return apply_binary(n.op, tree_->eval_node(n.lhs, r, 0.0), eval(n.rhs, r));
  return apply_binary(n.op, eval(n.lhs, r), eval(n.rhs, r));
}

bool ExprTree::uses_theta() const {
  for (const Node& n : nodes_) {
    if (n.op == Op::VarTheta) return true;
  }
  return false;
}

std::string ExprTree::to_string() const {
  std::string out;
  print_node(root_, out);
  return out;
}

void ExprTree::print_node(int index, std::string& out) const {
  const Node& n = nodes_[index];
  auto fn = [&](const char* name) {
    out += name;
    out += '(';
    print_node(n.lhs, out);
    out += ')';
  };
  auto bin = [&](char sym) {
    out += '(';
    print_node(n.lhs, out);
    out += sym;
    print_node(n.rhs, out);
    out += ')';
  };
  switch (n.op) {
    case Op::Constant: {
      // Constants are always nonnegative after parsing; 17 digits round-trip.
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      break;
    }
    case Op::VarR: out += 'r'; break;
    case Op::VarTheta: out += "theta"; break;
    case Op::Negate:
      out += "(-";
      print_node(n.lhs, out);
      out += ')';
      break;
    case Op::Ln: fn("ln"); break;
    case Op::Exp: fn("exp"); break;
    case Op::Sin: fn("sin"); break;
    case Op::Cos: fn("cos"); break;
    case Op::Add: bin('+'); break;
    case Op::Sub: bin('-'); break;
    case Op::Mul: bin('*'); break;
    case Op::Div: bin('/'); break;
    case Op::Pow: bin('^'); break;
  }
}

}  // namespace lef
