#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "phg/conformal.hpp"

using namespace phg;

namespace {

ScalarField random_factor(std::mt19937_64& rng, int m, double amp = 0.2) {
  return ScalarField::from_expr(Expr::parse(fx::trig(rng, m, amp)));
}

}  // namespace

TEST_CASE("conformal laws on random scenarios") {
  std::mt19937_64 rng(21);
  for (int m : {2, 3, 4, 5}) {
    for (int rep = 0; rep < 2; ++rep) {
      auto g = fx::random_metric(rng, m, 0.12, rep == 1 && m > 2 ? 1 : 0);
      auto tgt = rep ? TargetGeometry::round_sphere(2) : TargetGeometry::flat(2);
      auto phi = fx::random_map(rng, m, tgt);
      auto p = fx::random_point(rng, m);
      auto h = random_factor(rng, m);
      Residuals r = conformal_laws(g, phi, 0.6, h, p, 4);
      for (const auto& x : r) {
        CAPTURE(m);
        CAPTURE(x.law);
        CHECK(x.value < 1e-8);
      }
      if (m == 4) CHECK(find_residual(r, "bach_weighted_m4") < 1e-7);
      if (m >= 3) CHECK(delta_f_consistency(g, phi, 0.6, h, p) < 1e-9);
      if (m == 2) CHECK(surface_density_residual(g, phi, 0.6, h, p) < 1e-10);
    }
  }
}

TEST_CASE("conformal edge cases") {
  std::mt19937_64 rng(22);
  auto g = fx::random_metric(rng, 3);
  auto phi = fx::random_map(rng, 3, TargetGeometry::flat(2));
  auto p = fx::random_point(rng, 3);
  Residuals r0 = conformal_laws(g, phi, 0.5, ScalarField::from_expr(Expr(0.0)), p, 4);
  CHECK(max_residual(r0) < 1e-12);
  // constant factor: S̃ = e^{2c} S
  auto gc = conformal_metric(g, ScalarField::from_expr(Expr(0.3)));
  PhiBundle a = compute_phi(g, phi, 0.5, p, 2), b = compute_phi(gc, phi, 0.5, p, 2);
  CHECK(std::abs(b.s_phi.value() - std::exp(0.6) * a.s_phi.value()) < 1e-12);
  CHECK(composition_residual(g, phi, 0.5, Expr::parse("0.2*sin(x1)"), Expr::parse("0.1*cos(x2+x3)"), p) < 1e-10);
}

TEST_CASE("conformally harmonic-Einstein system") {
  // seed: unit S^3 with the identity map is harmonic-Einstein; g = e^{2f} g_seed has g̃ = seed
  std::vector<Expr> c(9, Expr(0.0));
  for (int i = 0; i < 3; ++i) c[i * 3 + i] = Expr::parse("4/(1+x1^2+x2^2+x3^2)^2");
  Expr f = Expr::parse("0.3*sin(x1)+0.2*x2*x3");
  std::vector<Expr> cg;
  for (auto& e : c) cg.push_back(e * exp(Expr(2.0) * f));
  auto g = MetricField::from_exprs(3, cg);
  auto phi = MapField::from_exprs(3, TargetGeometry::round_sphere(3), {Expr::x(0), Expr::x(1), Expr::x(2)});
  std::vector<double> p{0.2, -0.3, 0.4};
  ConformalHE r = conformally_harmonic_einstein(g, phi, 0.8, ScalarField::from_expr(f), p);
  CHECK(r.traceless < 1e-9);
  CHECK(r.tension < 1e-9);
  CHECK(r.direct_traceless < 1e-9);
  CHECK(r.direct_tension < 1e-9);
  ConformalHE bad = conformally_harmonic_einstein(g, phi, 0.8, ScalarField::from_expr(Expr(0.0)), p);
  CHECK(bad.traceless > 1e-3);
}

TEST_CASE("Q density identity") {
  std::mt19937_64 rng(23);
  auto flat = MetricField::constant(Eigen::MatrixXd::Identity(4, 4));
  auto cst = MapField::from_exprs(4, TargetGeometry::flat(2), {Expr(0.1), Expr(0.2)});
  for (int rep = 0; rep < 3; ++rep) {
    auto f = random_factor(rng, 4, 0.3);
    auto p = fx::random_point(rng, 4);
    CHECK(q_density_residual(flat, cst, 0.7, f, p) < 1e-8);
    auto g = fx::random_metric(rng, 4);
    auto phi = fx::random_map(rng, 4, TargetGeometry::flat(2));
    CHECK(q_density_residual(g, phi, 0.7, f, p) < 1e-8);
  }
  CHECK(q_density_residual(flat, cst, 0.7, ScalarField::from_expr(Expr(0.0)), {0.1, 0.2, 0.3, 0.4}) < 1e-14);
}
