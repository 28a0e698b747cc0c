#include <doctest.h>

#include <cmath>
#include <random>

#include "phg/variational.hpp"

using namespace phg;

namespace {

constexpr double kPi = 3.14159265358979323846;

// g = I + small wavenumber-1 terms, φ = x + small periodic terms into a flat torus.
// Low frequency keeps trapezoid aliasing far below the FD error.
ClosedSetup smooth_setup(std::uint64_t seed, int m, double amp, int N, double alpha = 0.7,
                         std::shared_ptr<const TargetGeometry> target = nullptr) {
  std::mt19937_64 rng(seed);
  ClosedSetup s;
  s.chart = Chart::torus(m);
  std::vector<Expr> c(m * m, Expr(0.0));
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) c[i * m + j] = c[j * m + i] = Expr(i == j ? 1.0 : 0.0) + random_periodic(rng, s.chart, amp, 1, 2);
  s.g = MetricField::from_exprs(m, c);
  if (!target) target = TargetGeometry::flat(m);
  std::vector<Expr> p;
  for (int a = 0; a < target->dim(); ++a) {
    Expr base = target->is_flat() && a < m ? Expr::x(a) : Expr(0.2 * (a + 1));
    Expr e = base + random_periodic(rng, s.chart, amp, 1, 2);
    p.push_back(target->is_flat() ? e : Expr(0.4) * e);
  }
  s.phi = MapField::from_exprs(m, target, p);
  s.alpha = alpha;
  s.grid = make_grid(s.chart, N);
  return s;
}

MetricField scaled(const MetricField& g, double c) {
  MetricField out = g;
  auto ge = g.eval;
  out.eval = [ge, c](const CoordJets& x) {
    auto v = ge(x);
    for (auto& j : v) j *= c;
    return v;
  };
  return out;
}

void check_reports(const std::vector<FunctionalReport>& rs) {
  for (const auto& r : rs) {
    INFO(r.name, " fd=", r.fd, " pairing=", r.pairing, " rel=", r.rel_error);
    CHECK(r.pass);
  }
}

}  // namespace

TEST_CASE("quadrature grid") {
  CHECK_THROWS_AS(make_grid(Chart::box(2, 0, 1), 8), VariationalError);
  CHECK_THROWS_AS(make_grid(Chart::torus(2), 0), VariationalError);
  auto g = make_grid(Chart::torus(3), 6);
  CHECK(g.size() == 216);
  CHECK(g.total_weight() == doctest::Approx(std::pow(2 * kPi, 3)).epsilon(1e-14));
  auto x = g.node(1 + 6 * 2 + 36 * 5);
  CHECK(x[0] == doctest::Approx(2 * kPi / 6));
  CHECK(x[1] == doctest::Approx(2 * 2 * kPi / 6));
  CHECK(x[2] == doctest::Approx(5 * 2 * kPi / 6));
  // trapezoid is exact for trig polynomials below the node count
  double v = integrate_dx(g, 1, [](const std::vector<double>& p) { return 1.0 + std::cos(2 * p[0]) * std::sin(p[1] + p[2]); });
  CHECK(v == doctest::Approx(std::pow(2 * kPi, 3)).epsilon(1e-13));
}

TEST_CASE("functionals on trivial and scaled scenarios") {
  SUBCASE("flat torus with a constant map") {
    ClosedSetup s;
    s.chart = Chart::torus(3);
    s.g = MetricField::constant(Eigen::MatrixXd::Identity(3, 3));
    s.phi = MapField::from_exprs(3, TargetGeometry::flat(2), {Expr(0.3), Expr(-1.0)});
    s.grid = make_grid(s.chart, 4);
    auto f = functionals(s);
    CHECK(f.vol == doctest::Approx(std::pow(2 * kPi, 3)).epsilon(1e-13));
    CHECK(std::abs(f.S) < 1e-12);
    CHECK(std::abs(f.E) < 1e-12);
    CHECK(std::abs(f.B) < 1e-12);
  }
  SUBCASE("identities and invariances") {
    for (int m : {3, 4}) {
      auto s = smooth_setup(11 + m, m, 0.1, m == 3 ? 8 : 5);
      auto f = functionals(s);
      CHECK(std::abs(f.S - (f.S_classical - 2 * s.alpha * f.E)) < 1e-10 * std::abs(f.S_classical));
      CHECK(std::abs(f.B - f.B_alt) < 1e-11 * std::max(1.0, std::abs(f.B)));
      CHECK(f.E > 0);
      ClosedSetup t = s;
      t.g = scaled(s.g, 2.3);
      auto ft = functionals(t);
      CHECK(ft.S_bar == doctest::Approx(f.S_bar).epsilon(1e-12));
      CHECK(ft.vol == doctest::Approx(f.vol * std::pow(2.3, m / 2.0)).epsilon(1e-12));
      // worker count does not change a single bit
      ClosedSetup p = s;
      p.threads = 3;
      auto fp = functionals(p);
      CHECK(fp.S == f.S);
      CHECK(fp.B == f.B);
    }
  }
}

TEST_CASE("second symmetric function of eigenvalues") {
  DTensor g(3, 2, 0.0), A(3, 2, 0.0);
  double gv[9] = {2, 0.3, 0, 0.3, 1, 0.1, 0, 0.1, 1.5};
  double av[9] = {1, -0.4, 0.2, -0.4, 0.5, 0.7, 0.2, 0.7, -1};
  for (int i = 0; i < 9; ++i) g[i] = gv[i], A[i] = av[i];
  Eigen::MatrixXd M = to_matrix(g).inverse() * to_matrix(A);
  const double expect = 0.5 * (M.trace() * M.trace() - (M * M).trace());
  CHECK(s2_eigenvalues(A, g) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("finite differences with Richardson") {
  auto d = fd_directional([](double t) { return std::sin(1 + t) * std::exp(0.3 * t); });
  CHECK(std::abs(d.value - (std::cos(1.0) + 0.3 * std::sin(1.0))) < 1e-11);
  CHECK(d.monotone);
  CHECK(d.central.size() == 3);
  CHECK_THROWS_AS(fd_directional([](double t) { return t; }, {1e-3, 1e-2}), VariationalError);
  CHECK_THROWS_AS(fd_directional([](double t) { return t; }, {1e-3}), VariationalError);
  CHECK(relative_error(0.0, 0.0) == 0.0);
  CHECK(relative_error(1.0, 1.0 + 1e-9) == doctest::Approx(1e-9).epsilon(1e-6));
}

TEST_CASE("great-circle map perturbation") {
  auto S2 = TargetGeometry::round_sphere(2);
  auto phi = MapField::from_exprs(2, S2, {Expr::parse("0.3*sin(x1)+0.1"), Expr::parse("0.5*cos(x2)")});
  auto v = VectorField::from_exprs({Expr::parse("1+0.2*cos(x1)"), Expr::parse("sin(x2)")});
  std::vector<double> p = {0.4, 1.1};
  auto speed = [&](double t) {
    auto d = fd_directional_many([&](double e) { return perturb_map(phi, v, t + e).value_at(p); });
    auto y = perturb_map(phi, v, t).value_at(p);
    DTensor eta = S2->metric_at(y);
    double s = 0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) s += eta(a, b) * d[a].value * d[b].value;
    return std::make_pair(std::sqrt(s), d);
  };
  auto [s0, d0] = speed(0.0);
  // initial velocity is v, speed stays constant along the geodesic
  auto vv = v.eval(coord_jets(p, 0));
  CHECK(std::abs(d0[0].value - vv[0].value()) < 1e-9);
  CHECK(std::abs(d0[1].value - vv[1].value()) < 1e-9);
  CHECK(speed(0.4).first == doctest::Approx(s0).epsilon(1e-9));
  CHECK(speed(-0.3).first == doctest::Approx(s0).epsilon(1e-9));
  CHECK_THROWS_AS(perturb_map(phi, VectorField::from_exprs({Expr(1.0)}), 0.1), VariationalError);
}

TEST_CASE("first variations against finite differences") {
  SUBCASE("T3 into a flat torus") {
    auto s = smooth_setup(3, 3, 0.1, 16);
    std::mt19937_64 rng(99);
    auto h = random_metric_direction(rng, s.chart, 0.3, 2);
    auto v = random_map_direction(rng, s.chart, 3, 0.3, 2);
    auto rs = variation_suite(s, h, v);
    CHECK(rs.size() == 9);
    check_reports(rs);
  }
  SUBCASE("T3 into the round sphere") {
    auto s = smooth_setup(4, 3, 0.15, 16, 0.5, TargetGeometry::round_sphere(2));
    std::mt19937_64 rng(5);
    auto h = random_metric_direction(rng, s.chart, 0.3, 2);
    auto v = random_map_direction(rng, s.chart, 2, 0.3, 2);
    check_reports(variation_suite(s, h, v));
  }
  SUBCASE("T4 with the Bach functional") {
    auto s = smooth_setup(8, 4, 0.05, 8);
    std::mt19937_64 rng(21);
    auto h = random_metric_direction(rng, s.chart, 0.3, 1);
    auto v = random_map_direction(rng, s.chart, 4, 0.3, 1);
    auto rs = variation_suite(s, h, v);
    CHECK(rs.size() == 11);
    check_reports(rs);
  }
}

TEST_CASE("linearised phi-scalar curvature") {
  auto s = smooth_setup(31, 3, 0.2, 4, 0.8, TargetGeometry::round_sphere(2));
  std::mt19937_64 rng(2);
  auto h = random_metric_direction(rng, s.chart, 0.5, 2);
  auto v = random_map_direction(rng, s.chart, 2, 0.5, 2);
  for (auto p : {std::vector<double>{0.3, 1.2, 4.0}, std::vector<double>{2.5, 5.1, 0.7}}) {
    auto fd = fd_directional([&](double t) {
      return compute_phi(perturb_metric(s.g, h, t), perturb_map(s.phi, v, t), s.alpha, p, 2).s_phi.value();
    });
    const double lin = linearized_phi_scalar(s.g, s.phi, s.alpha, h, v, p);
    CHECK(relative_error(fd.value, lin) < 1e-8);
  }
}

TEST_CASE("adjoint of the linearisation") {
  auto s = smooth_setup(41, 3, 0.1, 16, 0.6);
  std::mt19937_64 rng(8);
  auto u = ScalarField::from_expr(Expr(1.0) + random_periodic(rng, s.chart, 0.3, 2));
  auto h = random_metric_direction(rng, s.chart, 0.3, 2);
  auto v = random_map_direction(rng, s.chart, 3, 0.3, 2);
  auto d = adjoint_duality(s, u, h, v);
  INFO("lhs=", d.lhs, " rhs=", d.rhs);
  CHECK(d.rel <= 1e-7);
  CHECK(std::abs(d.lhs) > 1e-3);

  SUBCASE("static kernel") {
    // flat plane, φ = (k/√α) x2, u = e^{k x1}
    const double k = 0.7, alpha = 1.3;
    auto g = MetricField::constant(Eigen::MatrixXd::Identity(2, 2));
    auto phi = MapField::from_exprs(2, TargetGeometry::flat(1), {Expr(k / std::sqrt(alpha)) * Expr::x(1)});
    auto uk = ScalarField::from_expr(exp(Expr(k) * Expr::x(0)));
    for (auto p : {std::vector<double>{0.1, 0.2}, std::vector<double>{-1.0, 2.0}}) {
      auto r = kernel_system_residual(g, phi, alpha, uk, p);
      CHECK(max_residual(r) < 1e-12);
      auto a = scalar_map_adjoint(g, phi, alpha, uk, p);
      CHECK(max_abs(a.first) < 1e-12);
    }
    // wrong rate
    auto bad = ScalarField::from_expr(exp(Expr(1.1 * k) * Expr::x(0)));
    CHECK(find_residual(kernel_system_residual(g, phi, alpha, bad, {0.1, 0.2}), "metric") > 1e-2);
  }
}

TEST_CASE("conformal Laplacian and first eigenvalue") {
  ClosedSetup flat;
  flat.chart = Chart::torus(3);
  flat.g = MetricField::constant(Eigen::MatrixXd::Identity(3, 3));
  flat.phi = MapField::from_exprs(3, TargetGeometry::flat(1), {Expr(0.5)});
  flat.grid = make_grid(flat.chart, 8);
  auto l0 = lambda1(flat);
  CHECK(l0.basis == 125);
  CHECK(std::abs(l0.value) < 1e-10);
  CHECK(std::abs(lambda1(flat, 2, 0.75).value - 0.75) < 1e-10);
  CHECK_THROWS_AS(lambda1(flat, 4), VariationalError);

  auto s = smooth_setup(51, 3, 0.1, 8, 0.9);
  auto l = lambda1(s);
  CHECK(l.inf_s < 0);
  CHECK(l.value >= l.inf_s);
  auto f = functionals(s);
  CHECK(l.value <= f.S / f.vol + 1e-12);  // u ≡ 1 lies in the trial space
  CHECK(std::abs(lambda1(s, 2, 2.5).value - l.value - 2.5) < 1e-8);

  auto one = ScalarField::from_expr(Expr(1.0));
  std::vector<double> p = {0.5, 1.5, 2.5};
  CHECK(conformal_laplacian(s.g, s.phi, s.alpha, one, p) ==
        doctest::Approx(compute_phi(s.g, s.phi, s.alpha, p, 2).s_phi.value()).epsilon(1e-13));
}

TEST_CASE("Yamabe bounds and equation") {
  auto s = smooth_setup(61, 3, 0.1, 8, 0.9);
  auto r = yamabe_bound_check(s, 4, 17, {{0.2, 0.4, 0.6}, {3.0, 1.0, 5.0}});
  INFO("lambda1=", r.lambda1, " inf_s=", r.inf_s, " min_sbar=", r.min_sbar, " bound=", r.bound);
  CHECK(r.pass());
  CHECK(r.equation_residual < 1e-9);
  CHECK(r.bound < 0);

  auto u = ScalarField::from_expr(Expr::parse("1.2+0.3*sin(x1+x3)"));
  CHECK(std::abs(yamabe_equation_residual(s.g, s.phi, s.alpha, u, {1.0, 2.0, 3.0})) < 1e-10);
}

TEST_CASE("Q integral is conformally invariant") {
  auto s = smooth_setup(71, 4, 0.05, 8, 0.8);
  auto f = ScalarField::from_expr(Expr::parse("0.2*sin(x1)+0.1*cos(x2-x4)"));
  auto d = q_integral_invariance(s, f);
  INFO("Q=", d.lhs, " Q~=", d.rhs);
  CHECK(d.rel <= 1e-7);
  CHECK_THROWS_AS(q_integral(smooth_setup(1, 3, 0.1, 4)), VariationalError);
}
