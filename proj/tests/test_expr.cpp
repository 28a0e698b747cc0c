#include <random>

#include "doctest.h"
#include "phg/expr.hpp"
#include "phg/oracle.hpp"

using namespace phg;
using doctest::Approx;

TEST_CASE("parse and evaluate") {
  Expr e = Expr::parse("2*x1^2 - sin(x2)/3 + exp(-x1)");
  std::vector<double> p{0.4, -1.1};
  CHECK(e.eval(p) == Approx(2 * 0.16 - std::sin(-1.1) / 3 + std::exp(-0.4)));
  CHECK(e.x_arity() == 2);
  CHECK(Expr::parse("-x1^2").eval(std::vector<double>{3.0}) == Approx(-9.0));
  CHECK(Expr::parse("2^3^2").eval(std::vector<double>{}) == Approx(512.0));
  CHECK(Expr::parse("y2*x1").y_arity() == 2);
}

TEST_CASE("parse errors carry an offset") {
  try {
    Expr::parse("sin(x1");
    FAIL("expected a parse error");
  } catch (const ParseError& err) {
    CHECK(err.offset() == 7);
  }
  CHECK_THROWS_AS(Expr::parse("x7"), ParseError);
  CHECK_THROWS_AS(Expr::parse("tan(x1)"), ParseError);
  CHECK_THROWS_AS(Expr::parse("1 +"), ParseError);
}

TEST_CASE("printing round-trips") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    Expr e = oracle::random_expression(rng, 3, 4);
    Expr back = Expr::parse(e.str());
    CHECK(back.str() == e.str());
    std::vector<double> p{0.1, -0.2, 0.3};
    CHECK(back.eval(p) == e.eval(p));
  }
}

TEST_CASE("symbolic derivative matches jets") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 30; ++rep) {
    Expr e = oracle::random_expression(rng, 2, 3);
    std::vector<Jet> xs{Jet::variable(0, 0.2, 2, 2), Jet::variable(1, -0.4, 2, 2)};
    Jet j = e.eval(xs);
    for (int i = 0; i < 2; ++i) {
      double a = e.diff_x(i).eval(std::vector<double>{0.2, -0.4});
      CHECK(a == Approx(j.derivative(i).value()).epsilon(1e-12));
    }
  }
  Expr s = Expr::parse("x1*y1").shift_x(2);
  CHECK(s.x_arity() == 3);
  Expr sub = Expr::parse("y1^2").substitute_y({Expr::parse("sin(x1)")});
  CHECK(sub.eval(std::vector<double>{0.5}) == Approx(std::sin(0.5) * std::sin(0.5)));
}
