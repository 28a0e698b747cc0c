#pragma once
// Closed-form field expressions: a tiny grammar parsed into an immutable tree
// that evaluates through jets, differentiates symbolically and prints back to
// a string that re-parses to the identical tree.
//
// Grammar: reals, x1..x6 (source coordinates), y1..y6 (target coordinates),
// + - * / ^, exp log sqrt sin cos, parentheses. '^' is right associative and
// binds tighter than unary minus.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "phg/jet.hpp"

namespace phg {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int offset);
  int offset() const { return offset_; }  // 1-based character position
 private:
  int offset_;
};

enum class ExprOp { konst, x, y, neg, add, sub, mul, div, pow, exp, log, sqrt, sin, cos };

struct ExprNode;

class Expr {
 public:
  Expr();
  Expr(double v);  // NOLINT(implicit)

  static Expr parse(const std::string& text);
  static Expr x(int i);  // 0-based source coordinate
  static Expr y(int i);  // 0-based target coordinate

  ExprOp op() const;
  bool is_const() const;
  double const_value() const;
  bool is_zero() const { return is_const() && const_value() == 0.0; }

  // largest coordinate index used plus one (0 if none)
  int x_arity() const;
  int y_arity() const;

  Jet eval(const std::vector<Jet>& x, const std::vector<Jet>* y = nullptr) const;
  double eval(const std::vector<double>& x) const;

  Expr diff_x(int i) const;
  Expr diff_y(int i) const;
  Expr shift_x(int offset) const;                  // x_i -> x_{i+offset}
  Expr substitute_y(const std::vector<Expr>& ys) const;  // y_i -> ys[i]

  std::string str() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& a, const Expr& b);
  friend Expr exp(const Expr& a);
  friend Expr log(const Expr& a);
  friend Expr sqrt(const Expr& a);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);

  const std::shared_ptr<const ExprNode>& node() const { return n_; }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : n_(std::move(n)) {}
  static Expr make(ExprOp op, const Expr& a, const Expr& b);
  static Expr make(ExprOp op, const Expr& a);
  Expr diff(ExprOp var, int i) const;
  std::shared_ptr<const ExprNode> n_;
};

struct ExprNode {
  ExprOp op = ExprOp::konst;
  double value = 0.0;
  int var = 0;
  std::shared_ptr<const ExprNode> a, b;
};

std::vector<Expr> parse_all(const std::vector<std::string>& texts);

}  // namespace phg
