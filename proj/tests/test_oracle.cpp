#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "phg/oracle.hpp"
#include "phg/phicurv.hpp"

using namespace phg;

TEST_CASE("finite differences") {
  auto s = [](const std::vector<double>& q) { return std::sin(q[0]); };
  CHECK(std::abs(oracle::fd_partial(s, {0.3}, make_multi_index({1})).value - std::cos(0.3)) < 1e-9);
  auto xy = [](const std::vector<double>& q) { return q[0] * q[1]; };
  CHECK(std::abs(oracle::fd_partial(xy, {0.3, 0.7}, make_multi_index({1, 1})).value - 1.0) < 1e-10);
  CHECK_THROWS(oracle::fd_partial(s, {0.3}, make_multi_index({4})));
}

TEST_CASE("classical reduction with a constant map") {
  std::mt19937_64 rng(8);
  for (int m : {3, 4, 5}) {
    auto g = fx::random_metric(rng, m);
    auto p = fx::random_point(rng, m);
    auto cst = MapField::from_exprs(m, TargetGeometry::flat(2), {Expr(0.3), Expr(-0.2)});
    PhiBundle b = compute_phi(g, cst, 0.9, p, 4);
    oracle::Classical c = oracle::classical_curvatures(g, p, 4);
    CHECK(max_abs_diff(values(b.ric_phi), c.ric) < 1e-11);
    CHECK(max_abs_diff(values(b.schouten), c.schouten) < 1e-11);
    CHECK(max_abs_diff(values(b.cotton), c.cotton) < 1e-11);
    CHECK(max_abs_diff(values(b.weyl), c.weyl) < 1e-11);
    CHECK(max_abs_diff(values(b.bach), c.bach) < 1e-11);
  }
}
