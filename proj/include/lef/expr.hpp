#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace lef {

/// Immutable arithmetic expression over the polar variables r and theta.
///
/// Grammar (whitespace is ignored):
///
///     expr   := term (("+"|"-") term)*
///     term   := factor (("*"|"/") factor)*
///     factor := base ("^" factor)?
///     base   := number | "r" | "theta" | ident "(" expr ")" | "(" expr ")" | "-" factor
///     ident  := ln | exp | sin | cos
///
/// `^` is right-associative and binds tighter than unary minus, so
/// `-r^2` is `-(r^2)` while `r^-3` is `r^(-3)`.
class ExprTree {
 public:
  enum class Op { Constant, VarR, VarTheta, Negate, Ln, Exp, Sin, Cos, Add, Sub, Mul, Div, Pow };

  struct Node {
    Op op;
    double value = 0.0;  // Constant only
    int lhs = -1;        // operand for unary ops
    int rhs = -1;
  };

  double evaluate(double r, double theta) const;

  /// Values at one radius and many angles.  Subtrees free of theta are
  /// evaluated once.
  Eigen::ArrayXd evaluate_on_circle(double r, const Eigen::ArrayXd& theta) const;

  /// Fully parenthesised text that parses back to an equivalent tree.
  std::string to_string() const;

  bool uses_theta() const;
  bool is_constant() const { return nodes_[root_].op == Op::Constant; }
  double constant_value() const { return nodes_[root_].value; }

  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }

 private:
  friend class ExprParser;
  friend class CircleSampler;
  std::vector<Node> nodes_;
  int root_ = -1;

  double eval_node(int index, double r, double theta) const;
  bool node_uses_theta(int index) const;
  bool node_uses_r(int index) const;
  Eigen::ArrayXd eval_circle(int index, double r, const Eigen::ArrayXd& theta) const;
  void print_node(int index, std::string& out) const;
};

/// Evaluates a tree at the angles 2 pi j / n for many radii.  Subtrees
/// that depend on theta alone are tabulated once at construction.
class CircleSampler {
 public:
  CircleSampler(std::shared_ptr<const ExprTree> tree, int n);
  Eigen::ArrayXd evaluate(double r) const;
  int size() const { return static_cast<int>(theta_.size()); }

 private:
  enum class Kind : unsigned char { Scalar, AngleOnly, Mixed };
  std::shared_ptr<const ExprTree> tree_;
  Eigen::ArrayXd theta_;
  std::vector<Kind> kind_;
  std::vector<Eigen::ArrayXd> table_;  // filled for AngleOnly nodes

  Eigen::ArrayXd eval(int index, double r) const;
  Eigen::ArrayXd eval_theta_only(int index) const;
};

/// Parses `source`; throws ParseError (with byte offset) on malformed input
/// or unknown identifiers.
ExprTree parse_expr(std::string_view source);

}  // namespace lef
