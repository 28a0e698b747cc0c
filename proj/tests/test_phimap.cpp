#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "phg/phimap.hpp"

using namespace phg;
using doctest::Approx;

namespace {

MetricField flat(int m) { return MetricField::constant(Eigen::MatrixXd::Identity(m, m)); }

std::vector<Expr> ids(int m) {
  std::vector<Expr> c;
  for (int i = 0; i < m; ++i) c.push_back(Expr::x(i));
  return c;
}

}  // namespace

TEST_CASE("pullback and energy") {
  std::vector<double> p{0.3, 0.5, 0.7, 0.9};
  Geometry geo = compute_geometry(flat(4), p, 2);
  auto cst = MapField::from_exprs(4, TargetGeometry::flat(2), {Expr(0.5), Expr(1.0)});
  MapBundle mb = compute_map_bundle(cst, geo, p, 2);
  CHECK(max_abs(values(mb.pullback)) == 0.0);
  CHECK(mb.energy.value() == 0.0);

  Geometry g2 = compute_geometry(flat(2), {0.3, 0.5}, 2);
  auto id2 = MapField::from_exprs(2, TargetGeometry::flat(2), ids(2));
  MapBundle mi = compute_map_bundle(id2, g2, {0.3, 0.5}, 2);
  CHECK(mi.energy.value() == Approx(1.0));
  CHECK(max_abs(values(stress_energy(g2, mi))) < 1e-15);

  Eigen::MatrixXd A(2, 4);
  A << 1, 2, 0, -1, 0.5, 0, 3, 1;
  std::vector<Expr> lin;
  for (int a = 0; a < 2; ++a) {
    Expr e(0.0);
    for (int i = 0; i < 4; ++i) e = e + Expr(A(a, i)) * Expr::x(i);
    lin.push_back(e);
  }
  MapBundle ml = compute_map_bundle(MapField::from_exprs(4, TargetGeometry::flat(2), lin), geo, p, 2);
  Eigen::MatrixXd AtA = A.transpose() * A;
  CHECK((to_matrix(values(ml.pullback)) - AtA).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(ml.energy.value() == Approx(0.5 * A.squaredNorm()));
  DTensor T = values(stress_energy(geo, ml));
  CHECK((to_matrix(T) - (AtA - 0.5 * A.squaredNorm() * Eigen::MatrixXd::Identity(4, 4))).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(max_abs(values(ml.ddphi[0])) < 1e-15);
}

TEST_CASE("tension and bi-tension") {
  Geometry g1 = compute_geometry(flat(1), {0.8}, 5);
  auto s = MapField::from_exprs(1, TargetGeometry::flat(1), {Expr::parse("sin(x1)")});
  MapBundle mb = compute_map_bundle(s, g1, {0.8}, 5);
  CHECK(mb.ddphi[0](0, 0).value() == Approx(-std::sin(0.8)));
  CHECK(mb.tau[0][0].value() == Approx(-std::sin(0.8)));
  CHECK(mb.tau2[0][0].value() == Approx(std::sin(0.8)));

  for (int m : {2, 3}) {
    std::string r2 = "0";
    for (int i = 1; i <= m; ++i) r2 += "+x" + std::to_string(i) + "^2";
    std::vector<Expr> c(m * m, Expr(0.0));
    for (int i = 0; i < m; ++i) c[i * m + i] = Expr::parse("4/(1+" + r2 + ")^2");
    MetricField sph = MetricField::from_exprs(m, c);
    std::vector<double> p(m, 0.2);
    p[0] = -0.4;
    Geometry geo = compute_geometry(sph, p, 4);
    auto id = MapField::from_exprs(m, TargetGeometry::round_sphere(m), ids(m));
    MapBundle mi = compute_map_bundle(id, geo, p, 4);
    for (int a = 0; a < m; ++a) {
      CHECK(max_abs(values(mi.ddphi[a])) < 1e-12);
      CHECK(std::abs(mi.tau[a][0].value()) < 1e-12);
      CHECK(std::abs(mi.tau2[a][0].value()) < 1e-12);
    }
  }
}

TEST_CASE("conservation and commutation on random scenarios") {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 6; ++rep) {
    const int m = 2 + rep % 3;
    auto g = fx::random_metric(rng, m, 0.15, rep == 5 ? 1 : 0);
    auto tgt = rep % 2 ? TargetGeometry::round_sphere(2) : TargetGeometry::flat(3);
    auto phi = fx::random_map(rng, m, tgt);
    auto p = fx::random_point(rng, m);
    ConservationResiduals cr = conservation_residuals(g, phi, p);
    CHECK(cr.r1 < 1e-9);
    CHECK(cr.r2 < 1e-8);

    // ∇dφ symmetric; φ^a_{ijk} − φ^a_{ikj} = R^t_{ijk}φ^a_t − ^NR^a_{bcd}φ^b_i φ^c_j φ^d_k
    Geometry geo = compute_geometry(g, p, 4);
    MapBundle mb = compute_map_bundle(phi, geo, p, 4);
    Section d3 = pullback_derivative(mb.ddphi, geo, mb);
    double sym = 0, com = 0;
    for (int a = 0; a < mb.n; ++a)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          sym = std::max(sym, std::abs(mb.ddphi[a](i, j).value() - mb.ddphi[a](j, i).value()));
          for (int k = 0; k < m; ++k) {
            double v = d3[a](i, j, k).value() - d3[a](i, k, j).value();
            for (int t = 0; t < m; ++t) v -= geo.riem_up(t, i, j, k).value() * mb.dphi[a](t).value();
            if (!mb.target.riem_up.empty())
              for (int b = 0; b < mb.n; ++b)
                for (int c = 0; c < mb.n; ++c)
                  for (int d = 0; d < mb.n; ++d)
                    v += mb.target.riem_up(a, b, c, d).value() * mb.dphi[b](i).value() * mb.dphi[c](j).value() *
                         mb.dphi[d](k).value();
            com = std::max(com, std::abs(v));
          }
        }
    CHECK(sym < 1e-12);
    CHECK(com < 1e-9);
  }
  auto g = fx::random_metric(rng, 3);
  auto cst = MapField::from_exprs(3, TargetGeometry::flat(2), {Expr(0.1), Expr(0.2)});
  ConservationResiduals z = conservation_residuals(g, cst, {0.1, 0.2, 0.3});
  CHECK(z.r1 == 0.0);
  CHECK(z.r2 == 0.0);
}
