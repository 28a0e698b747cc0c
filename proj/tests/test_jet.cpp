#include <cmath>
#include <random>

#include "doctest.h"
#include "phg/expr.hpp"
#include "phg/jet.hpp"
#include "phg/oracle.hpp"

using namespace phg;
using doctest::Approx;

TEST_CASE("variable seeds") {
  Jet a = Jet::variable(0, 2.0, 2, 2);
  CHECK(a.value() == 2.0);
  CHECK(a.coeff(make_multi_index({1, 0})) == 1.0);
  CHECK(a.coeff(make_multi_index({0, 1})) == 0.0);
  CHECK(a.coeff(make_multi_index({2, 0})) == 0.0);
  Jet c = Jet::variable(0, 4.0, 2, 0);
  CHECK(c.order() == 0);
  CHECK(c.value() == 4.0);
  Jet b = Jet::variable(1, -3.5, 3, 1);
  CHECK(b.value() == -3.5);
  CHECK(b.coeff(make_multi_index({0, 1, 0})) == 1.0);
  CHECK_THROWS_AS(Jet::variable(3, 0.0, 3, 1), JetError);
}

TEST_CASE("arithmetic") {
  Jet x = Jet::variable(0, 3.0, 1, 2);
  Jet s = x * x;
  CHECK(s.value() == 9.0);
  CHECK(s.extract(make_multi_index({1})) == 6.0);
  CHECK(s.extract(make_multi_index({2})) == 2.0);

  Jet a = exp(Jet::variable(0, 0.3, 2, 3)) + Jet::variable(1, 0.2, 2, 3);
  Jet q = a / a;
  CHECK(q.value() == Approx(1.0));
  for (int i = 1; i < JetTable::get(2).size[3]; ++i) CHECK(std::abs(q.coeff(i)) < 1e-15);

  Jet u = Jet::variable(0, 2.0, 2, 2), v = Jet::variable(1, 5.0, 2, 2);
  CHECK((u * v).extract(make_multi_index({1, 1})) == 1.0);
  CHECK_THROWS_AS(jet_arith(u, Jet::variable(0, 1.0, 2, 3), JetOp::add), JetError);
  CHECK_THROWS_AS(u / (u - 2.0), JetError);
}

TEST_CASE("elementary functions") {
  Jet x = Jet::variable(0, 0.0, 1, 3);
  Jet e = exp(x);
  CHECK(e.coeff(0) == Approx(1.0));
  CHECK(e.coeff(1) == Approx(1.0));
  CHECK(e.coeff(2) == Approx(0.5));
  CHECK(e.coeff(3) == Approx(1.0 / 6.0));
  Jet s = sin(x);
  CHECK(s.coeff(0) == Approx(0.0));
  CHECK(s.coeff(1) == Approx(1.0));
  CHECK(s.coeff(2) == Approx(0.0));
  CHECK(s.coeff(3) == Approx(-1.0 / 6.0));

  Jet y = Jet::variable(0, 0.7, 1, 4);
  Jet r = sqrt(exp(y));
  Jet d = r * r - exp(y);
  for (int i = 0; i <= 4; ++i) CHECK(std::abs(d.coeff(i)) < 1e-14);

  CHECK_THROWS_AS(log(Jet::variable(0, -1.0, 1, 2)), JetError);
  CHECK_THROWS_AS(sqrt(Jet::variable(0, 0.0, 1, 2)), JetError);
  CHECK_THROWS_AS(pow(Jet::variable(0, -1.0, 1, 2), 0.5), JetError);
  CHECK(pow(Jet::variable(0, -2.0, 1, 2), 3.0).value() == Approx(-8.0));
}

TEST_CASE("extract and constant term") {
  Jet e = exp(Jet::variable(0, 0.0, 1, 3));
  CHECK(e.extract(make_multi_index({2})) == Approx(1.0));
  CHECK(e.extract(make_multi_index({0})) == e.value());
  CHECK_THROWS_AS(e.extract(make_multi_index({4})), JetError);
}

TEST_CASE("Leibniz and chain rule") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int rep = 0; rep < 20; ++rep) {
    const int m = 3;
    std::vector<Jet> xs;
    for (int i = 0; i < m; ++i) xs.push_back(Jet::variable(i, u(rng), m, 4));
    Expr ea = oracle::random_expression(rng, m, 3), eb = oracle::random_expression(rng, m, 3);
    Jet a = ea.eval(xs), b = eb.eval(xs);
    Jet ab = a * b;
    for (int i = 0; i < m; ++i) {
      double lhs = ab.derivative(i).value();
      double rhs = a.derivative(i).value() * b.value() + a.value() * b.derivative(i).value();
      CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(1.0, std::abs(lhs)));
    }
    // f(g(x)) through jets vs composing the symbolic derivative
    Jet chain = sin(exp(a * 0.3));
    Expr sym = sin(exp(ea * 0.3));
    for (int i = 0; i < m; ++i) {
      double d1 = chain.derivative(i).value();
      double d2 = sym.diff_x(i).eval(xs).value();
      CHECK(std::abs(d1 - d2) <= 1e-12 * std::max(1.0, std::abs(d1)));
    }
  }
}

TEST_CASE("jets agree with finite differences on random expressions") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const int m = 1 + rep % 3;
    Expr e = oracle::random_expression(rng, m, 1 + rep % 5);
    std::vector<double> p(m);
    for (auto& x : p) x = u(rng);
    worst = std::max(worst, oracle::jet_vs_fd(e, p, 3));
  }
  CHECK(worst < 1e-6);
}
