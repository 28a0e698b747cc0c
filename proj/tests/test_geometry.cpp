#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "phg/geometry.hpp"
#include "phg/oracle.hpp"

using namespace phg;
using doctest::Approx;

namespace {

MetricField sphere_metric(int m) {
  std::string r2 = "0";
  for (int i = 1; i <= m; ++i) r2 += "+x" + std::to_string(i) + "^2";
  std::vector<Expr> c(m * m, Expr(0.0));
  for (int i = 0; i < m; ++i) c[i * m + i] = Expr::parse("4/(1+" + r2 + ")^2");
  return MetricField::from_exprs(m, c);
}

}  // namespace

TEST_CASE("metric jets") {
  MetricField flat = MetricField::constant(Eigen::MatrixXd::Identity(3, 3));
  MetricJets mj = metric_at(flat, {0.1, 0.2, 0.3}, 2);
  CHECK(mj.det.value() == Approx(1.0));
  CHECK(mj.ginv(1, 1).value() == Approx(1.0));

  Eigen::MatrixXd mk = Eigen::MatrixXd::Identity(4, 4);
  mk(3, 3) = -1;
  MetricJets mm = metric_at(MetricField::constant(mk), {0, 0, 0, 0}, 1);
  CHECK(mm.vol.value() == Approx(1.0));
  Frame F = orthonormal_frame(values(mm.g));
  CHECK(F.eta == std::vector<double>{1, 1, 1, -1});

  MetricField conf = MetricField::from_exprs(2, {Expr::parse("exp(2*sin(x1))"), Expr(0.0), Expr(0.0),
                                                 Expr::parse("exp(2*sin(x1))")});
  MetricJets mc = metric_at(conf, {0.3, 0.1}, 3);
  CHECK(std::abs(mc.ginv(0, 0).value() - std::exp(-2 * std::sin(0.3))) < 1e-13);
  CHECK(std::abs(mc.ginv(0, 1).value()) < 1e-13);
  CHECK(std::abs(mc.ginv(0, 0).derivative(0).value() + 2 * std::cos(0.3) * std::exp(-2 * std::sin(0.3))) < 1e-12);

  MetricField degenerate = MetricField::from_exprs(2, {Expr(1.0), Expr(1.0), Expr(1.0), Expr(1.0)});
  CHECK_THROWS_AS(metric_at(degenerate, {0, 0}, 1), GeometryError);
}

TEST_CASE("Christoffel symbols") {
  MetricField polar = MetricField::from_exprs(2, {Expr(1.0), Expr(0.0), Expr(0.0), Expr::parse("x1^2")});
  Geometry geo = compute_geometry(polar, {1.7, 0.4}, 2);
  CHECK(geo.gamma(0, 1, 1).value() == Approx(-1.7));
  CHECK(geo.gamma(1, 0, 1).value() == Approx(1 / 1.7));
  CHECK(geo.gamma(1, 1, 0).value() == Approx(1 / 1.7));
  CHECK(max_abs(values(geo.riem)) < 1e-12);

  // conformally flat: Γ^k_ij = δ^k_i ω_j + δ^k_j ω_i − δ_ij ω^k, ω = 0.3 sin x1 + 0.2 cos x2
  MetricField cf = MetricField::from_exprs(
      2, {Expr::parse("exp(0.6*sin(x1)+0.4*cos(x2))"), Expr(0.0), Expr(0.0), Expr::parse("exp(0.6*sin(x1)+0.4*cos(x2))")});
  std::vector<double> p{0.5, 1.2};
  Geometry gc = compute_geometry(cf, p, 2, false);
  double w[2] = {0.3 * std::cos(0.5), -0.2 * std::sin(1.2)};
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double want = (k == i) * w[j] + (k == j) * w[i] - (i == j) * w[k];
        CHECK(std::abs(gc.gamma(k, i, j).value() - want) < 1e-13);
      }
  // derivatives of Γ against finite differences
  for (int k = 0; k < 2; ++k)
    for (int d = 0; d < 2; ++d) {
      auto f = [&](const std::vector<double>& q) { return compute_geometry(cf, q, 1, false).gamma(k, 0, 1).value(); };
      auto fd = oracle::fd_partial(f, p, d == 0 ? make_multi_index({1, 0}) : make_multi_index({0, 1}));
      CHECK(std::abs(gc.gamma(k, 0, 1).derivative(d).value() - fd.value) < 1e-8);
    }
}

TEST_CASE("constant curvature charts") {
  for (int m : {2, 3, 4}) {
    std::vector<double> p(m, 0.0);
    for (int i = 0; i < m; ++i) p[i] = 0.1 * (i + 1);
    Geometry geo = compute_geometry(sphere_metric(m), p, 2);
    CHECK(geo.scalar.value() == Approx(m * (m - 1.0)));
    DTensor want = oracle::constant_curvature_riemann(values(geo.g()), 1.0);
    CHECK(max_abs_diff(values(geo.riem), want) < 1e-10);
    Frame F = orthonormal_frame(values(geo.g()));
    DTensor ric = frame_components(values(geo.ric), F);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) CHECK(std::abs(ric(i, j) - (m - 1.0) * (i == j)) < 1e-10);
    DTensor riem = frame_components(values(geo.riem), F);
    DTensor eta(m, 2, 0.0);
    for (int i = 0; i < m; ++i) eta(i, i) = 1.0;
    CHECK(max_abs_diff(riem, oracle::constant_curvature_riemann(eta, 1.0)) < 1e-10);
  }
  // Poincaré ball, K = −1
  MetricField hyp = MetricField::from_exprs(
      3, {Expr::parse("4/(1-x1^2-x2^2-x3^2)^2"), Expr(0.0), Expr(0.0), Expr(0.0), Expr::parse("4/(1-x1^2-x2^2-x3^2)^2"),
          Expr(0.0), Expr(0.0), Expr(0.0), Expr::parse("4/(1-x1^2-x2^2-x3^2)^2")});
  Geometry gh = compute_geometry(hyp, {0.2, -0.1, 0.3}, 2);
  CHECK(max_abs_diff(values(gh.riem), oracle::constant_curvature_riemann(values(gh.g()), -1.0)) < 1e-10);
  CHECK(gh.scalar.value() == Approx(-6.0));
}

TEST_CASE("frames") {
  Eigen::MatrixXd d(2, 2);
  d << 4, 0, 0, 9;
  Frame F = orthonormal_frame(from_matrix(d));
  CHECK(F.e(0, 0) == Approx(0.5));
  CHECK(F.e(1, 1) == Approx(1.0 / 3.0));
  CHECK(std::abs(F.e(0, 1)) < 1e-15);
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 10; ++rep) {
    auto g = fx::random_metric(rng, 4, 0.2, rep % 2);
    DTensor gv = g.value_at(fx::random_point(rng, 4));
    Frame fr = orthonormal_frame(gv);
    DTensor eta = frame_components(gv, fr);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(std::abs(eta(i, j) - (i == j) * fr.eta[i]) < 1e-12);
    CHECK(fr.eta.front() == 1.0);
    CHECK((fr.theta * fr.e.transpose() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("covariant derivative and curvature identities") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const int m = 2 + rep % 4;
    auto g = fx::random_metric(rng, m, 0.2, rep % 3 == 0 ? 1 : 0);
    auto p = fx::random_point(rng, m);
    Geometry geo = compute_geometry(g, p, 3);
    JTensor dg = covariant_derivative(geo.g(), geo.gamma);
    CHECK(max_abs(values(dg)) < 1e-12);
    double tors = 0;
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) tors = std::max(tors, std::abs(geo.gamma(k, i, j).value() - geo.gamma(k, j, i).value()));
    CHECK(tors < 1e-12);
    CHECK(riemann_symmetry_residual(values(geo.riem)) < 1e-11);
    auto br = bianchi_residuals(g, p);
    CHECK(br.first < 1e-10);
    CHECK(br.second < 1e-10);

    // commutation: ω_{j,kt} − ω_{j,tk} = R^h_{jkt} ω_h on a random 1-form
    JTensor w(m, 1);
    for (int j = 0; j < m; ++j) {
      std::vector<Jet> xs;
      for (int i = 0; i < m; ++i) xs.push_back(Jet::variable(i, p[i], m, 3));
      w(j) = oracle::random_expression(rng, m, 2).eval(xs);
    }
    JTensor dd = covariant_derivative(covariant_derivative(w, geo.gamma), geo.gamma);
    double res = 0;
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) {
          double v = dd(j, k, t).value() - dd(j, t, k).value();
          for (int h = 0; h < m; ++h) v -= geo.riem_up(h, j, k, t).value() * w(h).value();
          res = std::max(res, std::abs(v));
        }
    CHECK(res < 1e-10);
  }
}

TEST_CASE("Kulkarni-Nomizu product") {
  std::mt19937_64 rng(5);
  auto g = fx::random_metric(rng, 3);
  Geometry geo = compute_geometry(g, fx::random_point(rng, 3), 2);
  JTensor gg = truncated(geo.g(), 0), ric = truncated(geo.ric, 0);
  JTensor a = kulkarni_nomizu(ric, gg), b = kulkarni_nomizu(gg, ric), s = kulkarni_nomizu(gg, gg);
  CHECK(max_abs_diff(values(a), values(b)) < 1e-14);
  CHECK(riemann_symmetry_residual(values(a)) < 1e-13);
  DTensor two = oracle::constant_curvature_riemann(values(gg), 2.0);
  CHECK(max_abs_diff(values(s), two) < 1e-13);
}
