#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "phg/warped.hpp"

using namespace phg;

namespace {

MetricField flat(int m, double sign_last = 1.0) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(m, m);
  g(m - 1, m - 1) = sign_last;
  return MetricField::constant(g);
}

Chart lorentz_chart(int d) {
  Chart c = Chart::box(d, -1.0, 1.0);
  c.n_pos = d - 1;
  c.n_neg = 1;
  return c;
}

MetricField stereo_sphere(int m) {
  std::string r2;
  for (int i = 1; i <= m; ++i) r2 += (i > 1 ? "+x" : "x") + std::to_string(i) + "^2";
  std::vector<Expr> c(m * m, Expr(0.0));
  for (int i = 0; i < m; ++i) c[i * m + i] = Expr::parse("4/(1+" + r2 + ")^2");
  return MetricField::from_exprs(m, c);
}

// flat ℝ² base, φ = c·x2 into ℝ, u = e^{k x1}: product is harmonic-Einstein
// when αc² = dk², with λ = −(2+d)dk².
struct HyperbolicCase {
  WarpedScenario ws;
  double lambda = 0.0;
};

HyperbolicCase hyperbolic_case(int d, double k, double alpha, bool lorentz_fiber) {
  const double c = k * std::sqrt(d / alpha);
  auto phi = MapField::from_exprs(2, TargetGeometry::flat(1), {Expr(c) * Expr::x(1)});
  auto u = ScalarField::from_expr(exp(Expr(k) * Expr::x(0)));
  Chart fc = lorentz_fiber ? lorentz_chart(d) : Chart::torus(d);
  HyperbolicCase hc;
  hc.ws = build_warped(Chart::box(2, -1, 1), flat(2), phi, alpha, fc, flat(d, lorentz_fiber ? -1.0 : 1.0), u);
  hc.lambda = -(2.0 + d) * d * k * k;
  return hc;
}

// hemisphere of S^m with u the height function, fibre S^d: the product is S^{m+d}
WarpedScenario sphere_case(int m, int d, double fiber_scale, double alpha) {
  std::string r2;
  for (int i = 1; i <= m; ++i) r2 += (i > 1 ? "+x" : "x") + std::to_string(i) + "^2";
  auto u = ScalarField::from_expr(Expr::parse("(1-(" + r2 + "))/(1+" + r2 + ")"));
  auto phi = MapField::from_exprs(m, TargetGeometry::flat(1), {Expr(0.3)});
  MetricField gf = stereo_sphere(d);
  if (fiber_scale != 1.0) {
    auto e = gf.eval;
    gf.eval = [e, fiber_scale](const CoordJets& x) {
      auto v = e(x);
      for (auto& j : v) j *= fiber_scale;
      return v;
    };
  }
  return build_warped(Chart::box(m, -0.9, 0.9), stereo_sphere(m), phi, alpha, Chart::box(d, -2, 2), gf, u);
}

}  // namespace

TEST_CASE("warped assembly") {
  auto phi = MapField::from_exprs(2, TargetGeometry::flat(1), {Expr::parse("sin(x1)")});
  auto one = ScalarField::from_expr(Expr(1.0));
  auto ws = build_warped(Chart::torus(2), flat(2), phi, 0.5, Chart::torus(1), flat(1), one);
  CHECK(ws.m == 2);
  CHECK(ws.d == 1);
  CHECK(ws.chart.dim == 3);
  DTensor g = ws.product.value_at({0.1, 0.2, 0.3});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(g(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
  // u ≡ 1 over flat pieces: flat product
  CHECK(check_warped_riemann(ws, {0.1, 0.2, 0.3}).max() < 1e-14);

  auto bad = ScalarField::from_expr(Expr::parse("x1"));
  CHECK_THROWS_AS(build_warped(Chart::torus(2), flat(2), phi, 0.5, Chart::torus(1), flat(1), bad, {{-0.5, 0.0}}),
                  WarpedError);
  CHECK_THROWS_AS(build_warped(Chart::torus(2), flat(2), phi, 0.5, Chart::torus(1), flat(1), bad, {{1e-4, 0.0}}),
                  WarpedError);
  auto ws2 = build_warped(Chart::torus(2), flat(2), phi, 0.5, Chart::torus(1), flat(1), bad);
  CHECK_THROWS_AS(check_warped_riemann(ws2, {-0.2, 0.0, 0.0}), WarpedError);

  // static form g − u²dt²
  auto st = build_warped_f(Chart::torus(3), flat(3), MapField::from_exprs(3, TargetGeometry::flat(1), {Expr(0.0)}),
                           0.5, lorentz_chart(1), flat(1, -1.0), ScalarField::from_expr(Expr::parse("0.3*sin(x1)")));
  DTensor gs = st.product.value_at({0.7, 0.1, 0.2, 0.0});
  CHECK(gs(3, 3) == doctest::Approx(-std::exp(-0.6 * std::sin(0.7))));
  CHECK(st.chart.n_neg == 1);
}

TEST_CASE("warped mixed block on a flat base") {
  auto phi = MapField::from_exprs(2, TargetGeometry::flat(1), {Expr(0.0)});
  auto u = ScalarField::from_expr(Expr::parse("exp(-x1)"));
  auto ws = build_warped(Chart::torus(2), flat(2), phi, 0.5, Chart::torus(1), flat(1), u);
  BlockReport r = check_warped_riemann(ws, {0.4, 1.0, 2.0});
  CHECK(r.max() < 1e-10);
  // direct value of the mixed sectional curvature: −u11/u = −1
  PhiBundle b = compute_phi(ws.product, ws.lifted, 0.5, {0.4, 1.0, 2.0}, 2, {false, false});
  Frame F = orthonormal_frame(values(b.geo.g()));
  DTensor R = frame_components(values(b.geo.riem), F);
  CHECK(R(0, 2, 0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("warped blocks on random scenarios") {
  std::mt19937_64 rng(77);
  for (int m : {2, 3}) {
    for (int d : {1, 2}) {
      for (int rep = 0; rep < 2; ++rep) {
        const bool lor = rep == 1;
        auto g = fx::random_metric(rng, m, 0.12, lor && m == 3 ? 1 : 0);
        auto tgt = rep ? TargetGeometry::round_sphere(2) : TargetGeometry::flat(2);
        auto phi = fx::random_map(rng, m, tgt);
        auto gF = fx::random_metric(rng, d, 0.12, lor ? 1 : 0);
        auto u = ScalarField::from_expr(Expr::parse("exp(" + fx::trig(rng, m, 0.3) + ")"));
        Chart fc = Chart::torus(d);
        if (lor) {
          fc.n_pos = d - 1;
          fc.n_neg = 1;
        }
        auto ws = build_warped(Chart::torus(m), g, phi, 0.7, fc, gF, u);
        auto P = fx::random_point(rng, m + d);
        WarpedBlocks wb = check_warped_all(ws, P);
        for (const auto& r : wb.reports) {
          CAPTURE(m);
          CAPTURE(d);
          CAPTURE(r.tensor);
          CHECK(r.max() < 1e-9);
        }
        CHECK(wb.form_gap < 1e-12);
        for (const auto& x : check_lifted_map(ws, P)) {
          CAPTURE(x.law);
          CHECK(x.value < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("lifted map edge cases") {
  std::mt19937_64 rng(5);
  auto g = fx::random_metric(rng, 2);
  auto cst = MapField::from_exprs(2, TargetGeometry::flat(2), {Expr(0.1), Expr(0.2)});
  auto u = ScalarField::from_expr(Expr::parse("2+sin(x1)"));
  auto ws = build_warped(Chart::torus(2), g, cst, 1.0, Chart::torus(1), flat(1), u);
  auto P = std::vector<double>{0.3, 0.4, 0.5};
  PhiBundle b = compute_phi(ws.product, ws.lifted, 1.0, P, 2, {false, false});
  for (int a = 0; a < 2; ++a) CHECK(std::abs(b.map.tau[a][0].value()) < 1e-14);

  // harmonic φ = x1 on flat ℝ², u = 2 + sin x1, d = 2: τ̄ = 2 cos x1 / u
  auto phi = MapField::from_exprs(2, TargetGeometry::flat(1), {Expr::x(0)});
  auto w = build_warped(Chart::torus(2), flat(2), phi, 1.0, Chart::torus(2), flat(2), u);
  auto Q = std::vector<double>{0.3, 0.4, 0.5, 0.6};
  PhiBundle bb = compute_phi(w.product, w.lifted, 1.0, Q, 2, {false, false});
  CHECK(bb.map.tau[0][0].value() == doctest::Approx(2.0 * std::cos(0.3) / (2.0 + std::sin(0.3))).epsilon(1e-12));
  CHECK(max_residual(check_lifted_map(w, Q)) < 1e-12);

  // u constant: τ̄ = τ
  auto phs = MapField::from_exprs(2, TargetGeometry::flat(1), {Expr::parse("sin(x1)*cos(x2)")});
  auto wc = build_warped(Chart::torus(2), flat(2), phs, 1.0, Chart::torus(1), flat(1),
                         ScalarField::from_expr(Expr(1.7)));
  PhiBundle bc = compute_phi(wc.product, wc.lifted, 1.0, P, 2, {false, false});
  CHECK(bc.map.tau[0][0].value() == doctest::Approx(-2.0 * std::sin(0.3) * std::cos(0.4)).epsilon(1e-12));
}

TEST_CASE("harmonic-Einstein warped products") {
  SUBCASE("trivial") {
    auto ws = build_warped(Chart::torus(2), flat(2), MapField::from_exprs(2, TargetGeometry::flat(1), {Expr(0.2)}),
                           1.0, Chart::torus(1), flat(1), ScalarField::from_expr(Expr(1.0)));
    CHECK(max_residual(harmonic_einstein_warped_check(ws, 0.0, 0.0, {0.1, 0.2, 0.3})) < 1e-14);
  }
  SUBCASE("hyperbolic, Riemannian fibre") {
    auto hc = hyperbolic_case(2, 0.7, 0.8, false);
    auto r = harmonic_einstein_warped_check(hc.ws, hc.lambda, 0.0, {0.3, -0.2, 1.0, 2.0});
    CHECK(base_side_defect(r) < 1e-10);
    CHECK(product_side_defect(r) < 1e-10);
  }
  SUBCASE("hyperbolic, Lorentzian fibre") {
    auto hc = hyperbolic_case(1, 0.9, 1.3, true);
    auto r = harmonic_einstein_warped_check(hc.ws, hc.lambda, 0.0, {0.3, -0.2, 0.5});
    CHECK(base_side_defect(r) < 1e-10);
    CHECK(product_side_defect(r) < 1e-10);
    // with a single Lorentzian time fibre the base is φ-static
    auto f = ScalarField::from_expr(Expr(-0.9) * Expr::x(0));
    auto s = phi_static_check(hc.ws.base, hc.ws.phi, hc.ws.alpha, f, hc.lambda, {0.3, -0.2});
    CHECK(max_residual(s) < 1e-10);
  }
  SUBCASE("sphere base with identity map") {
    const int m = 3;
    auto id = MapField::from_exprs(m, TargetGeometry::round_sphere(m), {Expr::x(0), Expr::x(1), Expr::x(2)});
    auto ws = build_warped_f(Chart::box(m, -1, 1), stereo_sphere(m), id, m - 1.0, Chart::torus(1), flat(1),
                             ScalarField::from_expr(Expr(0.4)));
    auto r = harmonic_einstein_warped_check(ws, 0.0, 0.0, {0.2, -0.3, 0.1, 1.0});
    CHECK(base_side_defect(r) < 1e-10);
    CHECK(product_side_defect(r) < 1e-8);
    // wrong coupling breaks both sides
    auto ws2 = build_warped_f(Chart::box(m, -1, 1), stereo_sphere(m), id, m - 1.5, Chart::torus(1), flat(1),
                              ScalarField::from_expr(Expr(0.4)));
    auto r2 = harmonic_einstein_warped_check(ws2, 0.0, 0.0, {0.2, -0.3, 0.1, 1.0});
    CHECK(base_side_defect(r2) > 1e-2);
    CHECK(product_side_defect(r2) > 1e-2);
  }
  SUBCASE("sphere by sphere") {
    auto ws = sphere_case(2, 2, 1.0, 0.5);
    const double lambda = 4.0 * 3.0, Lambda = 2.0;
    auto P = std::vector<double>{0.2, -0.4, 0.7, 0.3};
    auto r = harmonic_einstein_warped_check(ws, lambda, Lambda, P);
    CHECK(base_side_defect(r) < 1e-10);
    CHECK(product_side_defect(r) < 1e-10);
    // negative controls: a wrong Λ fails on the base side, a rescaled fibre fails on both
    auto bad = harmonic_einstein_warped_check(ws, lambda, Lambda * 1.25, P);
    CHECK(find_residual(bad, "constraint") > 1e-2);
    auto wb = sphere_case(2, 2, 1.2, 0.5);
    auto rb = harmonic_einstein_warped_check(wb, lambda, Lambda / 1.2, P);
    CHECK(base_side_defect(rb) > 1e-2);
    CHECK(product_side_defect(rb) > 1e-2);
  }
}

TEST_CASE("phi-static systems") {
  auto cst = MapField::from_exprs(3, TargetGeometry::flat(1), {Expr(0.5)});
  CHECK(max_residual(phi_static_check(flat(3), cst, 0.4, ScalarField::from_expr(Expr(1.3)), 0.0, {0.1, 0.2, 0.3})) <
        1e-14);
  // round S^2 with u the height function and constant map: the hemisphere is static (S^3 = S^2 ×_u S^1)
  auto u = "(1-(x1^2+x2^2))/(1+x1^2+x2^2)";
  auto f = ScalarField::from_expr(-log(Expr::parse(u)));
  auto c2 = MapField::from_exprs(2, TargetGeometry::flat(1), {Expr(0.5)});
  auto r = phi_static_check(stereo_sphere(2), c2, 0.4, f, 6.0, {0.2, 0.1});
  CHECK(max_residual(r) < 1e-12);
  // a nonconstant map breaks the system and the tension condition
  auto m2 = MapField::from_exprs(2, TargetGeometry::flat(1), {Expr::x(0)});
  auto rn = phi_static_check(stereo_sphere(2), m2, 0.4, f, 6.0, {0.2, 0.1});
  CHECK(find_residual(rn, "system") > 1e-2);
  CHECK(find_residual(rn, "tension") > 1e-2);
  CHECK(find_residual(rn, "eigen") < 1e-12);
  // Riemannian static fibre: flat ℝ² with φ = c x2, f = −k x1
  const double k = 0.6, alpha = 0.9, c = k / std::sqrt(alpha);
  auto phi = MapField::from_exprs(2, TargetGeometry::flat(1), {Expr(c) * Expr::x(1)});
  const double lambda = -3.0 * k * k;
  auto s = phi_static_check(flat(2), phi, alpha, ScalarField::from_expr(Expr(-k) * Expr::x(0)), lambda, {0.5, 0.2});
  CHECK(max_residual(s) < 1e-12);
  CHECK(find_residual(s, "scalar") < 1e-10);
}
