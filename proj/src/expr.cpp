#include "phg/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace phg {

ParseError::ParseError(const std::string& msg, int offset)
    : std::runtime_error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr leaf(ExprOp op, double v, int var) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->value = v;
  n->var = var;
  return n;
}

bool is_unary(ExprOp op) {
  return op == ExprOp::neg || op == ExprOp::exp || op == ExprOp::log || op == ExprOp::sqrt ||
         op == ExprOp::sin || op == ExprOp::cos;
}

double apply(ExprOp op, double a, double b) {
  switch (op) {
    case ExprOp::neg: return -a;
    case ExprOp::add: return a + b;
    case ExprOp::sub: return a - b;
    case ExprOp::mul: return a * b;
    case ExprOp::div: return a / b;
    case ExprOp::pow: return std::pow(a, b);
    case ExprOp::exp: return std::exp(a);
    case ExprOp::log: return std::log(a);
    case ExprOp::sqrt: return std::sqrt(a);
    case ExprOp::sin: return std::sin(a);
    case ExprOp::cos: return std::cos(a);
    default: break;
  }
  return 0.0;
}

}  // namespace

Expr::Expr() : n_(leaf(ExprOp::konst, 0.0, 0)) {}
Expr::Expr(double v) : n_(leaf(ExprOp::konst, v, 0)) {}
Expr Expr::x(int i) { return Expr(leaf(ExprOp::x, 0.0, i)); }
Expr Expr::y(int i) { return Expr(leaf(ExprOp::y, 0.0, i)); }

ExprOp Expr::op() const { return n_->op; }
bool Expr::is_const() const { return n_->op == ExprOp::konst; }
double Expr::const_value() const { return n_->value; }

Expr Expr::make(ExprOp op, const Expr& a) {
  if (a.is_const()) return Expr(apply(op, a.const_value(), 0.0));
  if (op == ExprOp::neg && a.op() == ExprOp::neg) return Expr(a.n_->a);
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = a.n_;
  return Expr(NodePtr(n));
}

Expr Expr::make(ExprOp op, const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr(apply(op, a.const_value(), b.const_value()));
  switch (op) {
    case ExprOp::add:
      if (a.is_zero()) return b;
      if (b.is_zero()) return a;
      break;
    case ExprOp::sub:
      if (b.is_zero()) return a;
      if (a.is_zero()) return make(ExprOp::neg, b);
      break;
    case ExprOp::mul:
      if (a.is_zero() || b.is_zero()) return Expr(0.0);
      if (a.is_const() && a.const_value() == 1.0) return b;
      if (b.is_const() && b.const_value() == 1.0) return a;
      break;
    case ExprOp::div:
      if (a.is_zero()) return Expr(0.0);
      if (b.is_const() && b.const_value() == 1.0) return a;
      break;
    case ExprOp::pow:
      if (b.is_const() && b.const_value() == 1.0) return a;
      if (b.is_zero()) return Expr(1.0);
      break;
    default: break;
  }
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = a.n_;
  n->b = b.n_;
  return Expr(NodePtr(n));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::make(ExprOp::add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::make(ExprOp::sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make(ExprOp::mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::make(ExprOp::div, a, b); }
Expr operator-(const Expr& a) { return Expr::make(ExprOp::neg, a); }
Expr pow(const Expr& a, const Expr& b) { return Expr::make(ExprOp::pow, a, b); }
Expr exp(const Expr& a) { return Expr::make(ExprOp::exp, a); }
Expr log(const Expr& a) { return Expr::make(ExprOp::log, a); }
Expr sqrt(const Expr& a) { return Expr::make(ExprOp::sqrt, a); }
Expr sin(const Expr& a) { return Expr::make(ExprOp::sin, a); }
Expr cos(const Expr& a) { return Expr::make(ExprOp::cos, a); }

namespace {

int arity(const NodePtr& n, ExprOp which) {
  if (!n) return 0;
  if (n->op == which) return n->var + 1;
  return std::max(arity(n->a, which), arity(n->b, which));
}

Jet eval_jet(const ExprNode& n, const std::vector<Jet>& x, const std::vector<Jet>* y) {
  switch (n.op) {
    case ExprOp::konst: return Jet(x.front().vars(), x.front().order(), n.value);
    case ExprOp::x:
      if (n.var >= static_cast<int>(x.size())) throw JetError("expression uses x" + std::to_string(n.var + 1) + " beyond the chart dimension");
      return x[n.var];
    case ExprOp::y:
      if (!y || n.var >= static_cast<int>(y->size())) throw JetError("expression uses y" + std::to_string(n.var + 1) + " without target coordinates");
      return (*y)[n.var];
    case ExprOp::neg: return -eval_jet(*n.a, x, y);
    case ExprOp::add: return eval_jet(*n.a, x, y) + eval_jet(*n.b, x, y);
    case ExprOp::sub: return eval_jet(*n.a, x, y) - eval_jet(*n.b, x, y);
    case ExprOp::mul: {
      if (n.a->op == ExprOp::konst) return eval_jet(*n.b, x, y) * n.a->value;
      if (n.b->op == ExprOp::konst) return eval_jet(*n.a, x, y) * n.b->value;
      return eval_jet(*n.a, x, y) * eval_jet(*n.b, x, y);
    }
    case ExprOp::div: {
      if (n.b->op == ExprOp::konst) return eval_jet(*n.a, x, y) / n.b->value;
      return eval_jet(*n.a, x, y) / eval_jet(*n.b, x, y);
    }
    case ExprOp::pow: {
      Jet base = eval_jet(*n.a, x, y);
      if (n.b->op == ExprOp::konst) return pow(base, n.b->value);
      return exp(eval_jet(*n.b, x, y) * log(base));
    }
    case ExprOp::exp: return exp(eval_jet(*n.a, x, y));
    case ExprOp::log: return log(eval_jet(*n.a, x, y));
    case ExprOp::sqrt: return sqrt(eval_jet(*n.a, x, y));
    case ExprOp::sin: return sin(eval_jet(*n.a, x, y));
    case ExprOp::cos: return cos(eval_jet(*n.a, x, y));
  }
  throw JetError("corrupt expression node");
}

double eval_double(const ExprNode& n, const std::vector<double>& x) {
  switch (n.op) {
    case ExprOp::konst: return n.value;
    case ExprOp::x:
      if (n.var >= static_cast<int>(x.size())) throw JetError("expression uses a coordinate beyond the point dimension");
      return x[n.var];
    case ExprOp::y: throw JetError("target coordinate in a source expression");
    default: break;
  }
  double a = eval_double(*n.a, x);
  double b = n.b ? eval_double(*n.b, x) : 0.0;
  return apply(n.op, a, b);
}

}  // namespace

int Expr::x_arity() const { return arity(n_, ExprOp::x); }
int Expr::y_arity() const { return arity(n_, ExprOp::y); }

Jet Expr::eval(const std::vector<Jet>& x, const std::vector<Jet>* y) const {
  if (x.empty()) throw JetError("expression evaluated without coordinates");
  return eval_jet(*n_, x, y);
}

double Expr::eval(const std::vector<double>& x) const { return eval_double(*n_, x); }

Expr Expr::diff(ExprOp var, int i) const {
  const ExprNode& n = *n_;
  switch (n.op) {
    case ExprOp::konst: return Expr(0.0);
    case ExprOp::x:
    case ExprOp::y: return Expr((n.op == var && n.var == i) ? 1.0 : 0.0);
    default: break;
  }
  Expr a(n.a);
  Expr da = a.diff(var, i);
  Expr b = n.b ? Expr(n.b) : Expr(0.0);
  Expr db = n.b ? b.diff(var, i) : Expr(0.0);
  switch (n.op) {
    case ExprOp::neg: return -da;
    case ExprOp::add: return da + db;
    case ExprOp::sub: return da - db;
    case ExprOp::mul: return da * b + a * db;
    case ExprOp::div: return da / b - a * db / (b * b);
    case ExprOp::pow:
      if (b.is_const()) return b * pow(a, Expr(b.const_value() - 1.0)) * da;
      return *this * (db * log(a) + b * da / a);
    case ExprOp::exp: return *this * da;
    case ExprOp::log: return da / a;
    case ExprOp::sqrt: return da / (Expr(2.0) * *this);
    case ExprOp::sin: return cos(a) * da;
    case ExprOp::cos: return -(sin(a) * da);
    default: break;
  }
  throw JetError("corrupt expression node");
}

Expr Expr::diff_x(int i) const { return diff(ExprOp::x, i); }
Expr Expr::diff_y(int i) const { return diff(ExprOp::y, i); }

Expr Expr::shift_x(int offset) const {
  const ExprNode& n = *n_;
  if (n.op == ExprOp::x) return Expr::x(n.var + offset);
  if (n.op == ExprOp::konst || n.op == ExprOp::y) return *this;
  Expr a = Expr(n.a).shift_x(offset);
  if (is_unary(n.op)) return make(n.op, a);
  return make(n.op, a, Expr(n.b).shift_x(offset));
}

Expr Expr::substitute_y(const std::vector<Expr>& ys) const {
  const ExprNode& n = *n_;
  if (n.op == ExprOp::y) {
    if (n.var >= static_cast<int>(ys.size())) throw JetError("substitution misses a target coordinate");
    return ys[n.var];
  }
  if (n.op == ExprOp::konst || n.op == ExprOp::x) return *this;
  Expr a = Expr(n.a).substitute_y(ys);
  if (is_unary(n.op)) return make(n.op, a);
  return make(n.op, a, Expr(n.b).substitute_y(ys));
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", std::abs(v));
  std::string s(buf);
  return v < 0 || std::signbit(v) ? "(-" + s + ")" : s;
}

void print(const ExprNode& n, std::string& out) {
  switch (n.op) {
    case ExprOp::konst: out += num(n.value); return;
    case ExprOp::x: out += "x" + std::to_string(n.var + 1); return;
    case ExprOp::y: out += "y" + std::to_string(n.var + 1); return;
    case ExprOp::neg:
      out += "(-";
      print(*n.a, out);
      out += ")";
      return;
    case ExprOp::exp:
    case ExprOp::log:
    case ExprOp::sqrt:
    case ExprOp::sin:
    case ExprOp::cos: {
      static const char* names[] = {"exp", "log", "sqrt", "sin", "cos"};
      out += names[static_cast<int>(n.op) - static_cast<int>(ExprOp::exp)];
      out += "(";
      print(*n.a, out);
      out += ")";
      return;
    }
    default: break;
  }
  static const char ops[] = {'+', '-', '*', '/', '^'};
  out += "(";
  print(*n.a, out);
  out += ops[static_cast<int>(n.op) - static_cast<int>(ExprOp::add)];
  print(*n.b, out);
  out += ")";
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  Expr run() {
    Expr e = expr();
    skip();
    if (pos_ < s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, static_cast<int>(pos_) + 1); }

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

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+')) e = e + term();
      else if (accept('-')) e = e - term();
      else return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) e = e * unary();
      else if (accept('/')) e = e / unary();
      else return e;
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return pow(base, unary());
    return base;
  }

  Expr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return Expr(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string name = s_.substr(start, pos_ - start);
      if ((name[0] == 'x' || name[0] == 'y') && name.size() == 2 && name[1] >= '1' && name[1] <= '6') {
        int i = name[1] - '1';
        return name[0] == 'x' ? Expr::x(i) : Expr::y(i);
      }
      static const std::pair<const char*, Expr (*)(const Expr&)> funcs[] = {
          {"exp", [](const Expr& a) { return exp(a); }},   {"log", [](const Expr& a) { return log(a); }},
          {"sqrt", [](const Expr& a) { return sqrt(a); }}, {"sin", [](const Expr& a) { return sin(a); }},
          {"cos", [](const Expr& a) { return cos(a); }}};
      for (const auto& [fname, fn] : funcs) {
        if (name == fname) {
          if (!accept('(')) fail("function '" + name + "' expects one parenthesized argument");
          Expr arg = expr();
          skip();
          if (accept(',')) fail("function '" + name + "' takes exactly one argument");
          expect(')');
          return fn(arg);
        }
      }
      pos_ = start;
      fail("unknown symbol '" + name + "'");
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }
};

}  // namespace

std::string Expr::str() const {
  std::string out;
  print(*n_, out);
  return out;
}

Expr Expr::parse(const std::string& text) { return Parser(text).run(); }

std::vector<Expr> parse_all(const std::vector<std::string>& texts) {
  std::vector<Expr> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(Expr::parse(t));
  return out;
}

}  // namespace phg
