#include "phg/phimap.hpp"

#include <cmath>

namespace phg {

std::shared_ptr<const TargetGeometry> TargetGeometry::flat(int n) {
  std::vector<Expr> eta(n * n, Expr(0.0));
  for (int a = 0; a < n; ++a) eta[a * n + a] = Expr(1.0);
  return build(n, eta, TargetKind::flat);
}

std::shared_ptr<const TargetGeometry> TargetGeometry::round_sphere(int n) {
  Expr r2(0.0);
  for (int a = 0; a < n; ++a) r2 = r2 + Expr::y(a) * Expr::y(a);
  Expr conf = Expr(4.0) / pow(Expr(1.0) + r2, Expr(2.0));
  std::vector<Expr> eta(n * n, Expr(0.0));
  for (int a = 0; a < n; ++a) eta[a * n + a] = conf;
  return build(n, eta, TargetKind::round_sphere);
}

std::shared_ptr<const TargetGeometry> TargetGeometry::from_metric(int n, const std::vector<Expr>& eta) {
  return build(n, eta, TargetKind::custom);
}

std::shared_ptr<const TargetGeometry> TargetGeometry::build(int n, const std::vector<Expr>& eta, TargetKind kind) {
  if (n < 1 || n > kMaxVars) throw GeometryError("target dimension out of range");
  if (static_cast<int>(eta.size()) != n * n) throw GeometryError("target metric needs n*n components");
  auto t = std::shared_ptr<TargetGeometry>(new TargetGeometry());
  t->n_ = n;
  t->eta_ = eta;
  t->kind_ = kind;
  t->flat_ = true;
  for (const auto& e : eta) {
    if (e.x_arity() > 0) throw GeometryError("target metric may only use y1..yn");
    if (e.y_arity() > n) throw GeometryError("target metric uses a coordinate beyond its dimension");
    if (!e.is_const()) t->flat_ = false;
  }
  if (!t->flat_) {
    t->deta_.resize(n * n * n);
    t->ddeta_.resize(n * n * n * n);
    for (int c = 0; c < n; ++c)
      for (int ab = 0; ab < n * n; ++ab) {
        t->deta_[c * n * n + ab] = eta[ab].diff_y(c);
        for (int d = 0; d < n; ++d) t->ddeta_[(c * n + d) * n * n + ab] = t->deta_[c * n * n + ab].diff_y(d);
      }
  }
  return t;
}

DTensor TargetGeometry::metric_at(const std::vector<double>& y) const {
  std::vector<Jet> yj = coord_jets(y, 0);
  DTensor out(n_, 2, 0.0);
  for (int i = 0; i < n_ * n_; ++i) out[i] = eta_[i].eval(yj, &yj).value();
  return out;
}

TargetGeometry::Local TargetGeometry::eval(const std::vector<Jet>& y, bool curvature) const {
  const int n = n_;
  Local L;
  L.eta = JTensor(n, 2);
  for (int i = 0; i < n * n; ++i) L.eta[i] = eta_[i].eval(y, &y);
  if (flat_) return L;

  JTensor inv;
  Jet det;
  invert_jet_matrix(L.eta, inv, det);
  const int nv = y[0].vars();
  const int K = y[0].order();
  std::vector<Jet> de(n * n * n);
  for (int i = 0; i < n * n * n; ++i) de[i] = deta_[i].eval(y, &y);
  auto D = [&](int c, int a, int b) -> const Jet& { return de[(c * n + a) * n + b]; };

  JTensor low(n, 3, Jet(nv, K, 0.0));  // Γ_{d,bc}
  for (int d = 0; d < n; ++d)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) low(d, b, c) = (D(b, d, c) + D(c, d, b) - D(d, b, c)) * 0.5;
  L.gamma = JTensor(n, 3, Jet(nv, K, 0.0));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) L.gamma(a, b, c).add_product(inv(a, d), low(d, b, c));
  if (!curvature) return L;

  std::vector<Jet> dde(n * n * n * n);
  for (int i = 0; i < n * n * n * n; ++i) dde[i] = ddeta_[i].eval(y, &y);
  auto DD = [&](int c, int d, int a, int b) -> const Jet& { return dde[((c * n + d) * n + a) * n + b]; };

  // dG[c](a, d, b) = ∂_c Γ^a_{db}
  std::vector<JTensor> dG(n, JTensor(n, 3, Jet(nv, K, 0.0)));
  for (int c = 0; c < n; ++c) {
    JTensor dinv(n, 2, Jet(nv, K, 0.0));  // ∂_c η^{ae} = −η^{ap} ∂_c η_pq η^{qe}
    for (int a = 0; a < n; ++a)
      for (int e = 0; e < n; ++e)
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) dinv(a, e).add_product(inv(a, p), D(c, p, q) * inv(q, e), -1.0);
    for (int a = 0; a < n; ++a)
      for (int d = 0; d < n; ++d)
        for (int b = 0; b < n; ++b) {
          Jet& out = dG[c](a, d, b);
          for (int e = 0; e < n; ++e) {
            out.add_product(dinv(a, e), low(e, d, b));
            Jet dl = (DD(c, d, e, b) + DD(c, b, e, d) - DD(c, e, d, b)) * 0.5;
            out.add_product(inv(a, e), dl);
          }
        }
  }
  L.riem_up = JTensor(n, 4, Jet(nv, K, 0.0));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          Jet v = dG[c](a, d, b) - dG[d](a, c, b);
          for (int e = 0; e < n; ++e) {
            v.add_product(L.gamma(a, c, e), L.gamma(e, d, b));
            v.add_product(L.gamma(a, d, e), L.gamma(e, c, b), -1.0);
          }
          L.riem_up(a, b, c, d) = std::move(v);
        }
  return L;
}

MapField MapField::from_exprs(int src_dim, std::shared_ptr<const TargetGeometry> target, std::vector<Expr> comps) {
  if (!target) throw GeometryError("map needs a target geometry");
  if (static_cast<int>(comps.size()) != target->dim()) throw GeometryError("map component count differs from target dimension");
  for (const auto& e : comps) {
    if (e.y_arity() > 0) throw GeometryError("map components may only use source coordinates");
    if (e.x_arity() > src_dim) throw GeometryError("map component uses a coordinate beyond the source dimension");
  }
  MapField f;
  f.src_dim = src_dim;
  f.target = std::move(target);
  auto shared = std::make_shared<std::vector<Expr>>(std::move(comps));
  f.eval = [shared](const CoordJets& x) {
    std::vector<Jet> out;
    out.reserve(shared->size());
    for (const auto& e : *shared) out.push_back(e.eval(x));
    return out;
  };
  return f;
}

std::vector<double> MapField::value_at(const std::vector<double>& p) const {
  auto j = eval(coord_jets(p, 0));
  std::vector<double> out;
  for (const auto& x : j) out.push_back(x.value());
  return out;
}

Section pullback_derivative(const Section& s, const Geometry& geo, const MapBundle& mb) {
  const int n = mb.n;
  const int m = geo.m;
  Section out(n);
  for (int a = 0; a < n; ++a) out[a] = covariant_derivative(s[a], geo.gamma);
  if (mb.target.gamma.empty()) return out;
  const std::size_t stride = s[0].size();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < m; ++c) {
        Jet coef = mb.target.gamma(a, b, 0) * mb.dphi[b](c);
        for (int d = 0; d < n; ++d) {
          if (d > 0) coef = mb.target.gamma(a, b, d) * mb.dphi[b](c);
          for (std::size_t I = 0; I < stride; ++I) out[a][I * m + c].add_product(coef, s[d][I]);
        }
      }
  return out;
}

Jet target_dot(const MapBundle& mb, const Section& s, std::size_t is, const Section& t, std::size_t it) {
  const int n = mb.n;
  const Jet& ref = s[0][is];
  int K = std::min(s[0][is].order(), t[0][it].order());
  Jet v(ref.vars(), K, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (mb.target.gamma.empty() && mb.target.eta(a, b).value() == 0.0) continue;
      v.add_product(mb.target.eta(a, b), s[a][is] * t[b][it]);
    }
  return v;
}

MapBundle compute_map_bundle(const MapField& phi, const Geometry& geo, const std::vector<double>& p, int K) {
  MapBundle mb;
  mb.m = geo.m;
  mb.n = phi.target->dim();
  mb.K = K;
  const int m = mb.m, n = mb.n;
  if (phi.src_dim != m) throw GeometryError("map source dimension differs from the metric dimension");
  if (K < 1) throw JetError("jet order budget exhausted: map derivatives need order >= 1");
  mb.phi = phi.eval(coord_jets(p, K));
  std::vector<Jet> y;
  const int Kt = std::max(K - 2, 0);
  for (const auto& j : mb.phi) y.push_back(j.truncated(Kt));
  mb.target = phi.target->eval(y, K >= 4);

  mb.dphi.resize(n);
  for (int a = 0; a < n; ++a) {
    mb.dphi[a] = JTensor(m, 1);
    for (int c = 0; c < m; ++c) mb.dphi[a](c) = mb.phi[a].derivative(c);
  }
  const int nv = mb.phi[0].vars();
  mb.pullback = JTensor(m, 2, Jet(nv, std::min(K - 1, Kt), 0.0));
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      mb.pullback(i, j) = target_dot(mb, mb.dphi, i, mb.dphi, j);
      mb.pullback(j, i) = mb.pullback(i, j);
    }
  mb.energy = trace2(mb.pullback, geo.ginv()) * 0.5;
  if (K < 2) return mb;

  mb.ddphi = pullback_derivative(mb.dphi, geo, mb);
  mb.tau.resize(n);
  for (int a = 0; a < n; ++a) {
    mb.tau[a] = JTensor(m, 0);
    mb.tau[a][0] = trace2(mb.ddphi[a], geo.ginv());
  }
  if (K < 3) return mb;
  mb.dtau = pullback_derivative(mb.tau, geo, mb);
  if (K < 4) return mb;
  mb.ddtau = pullback_derivative(mb.dtau, geo, mb);
  mb.tau2.resize(n);
  for (int a = 0; a < n; ++a) {
    mb.tau2[a] = JTensor(m, 0);
    Jet v = trace2(mb.ddtau[a], geo.ginv());
    if (!mb.target.riem_up.empty()) {
      // − ^NR^a_{bcd} φ^b_i φ^c_j g^{ij} τ^d
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          Jet pbc(nv, v.order(), 0.0);
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) pbc.add_product(geo.ginv()(i, j), mb.dphi[b](i) * mb.dphi[c](j));
          for (int d = 0; d < n; ++d) v.add_product(mb.target.riem_up(a, b, c, d), pbc * mb.tau[d][0], -1.0);
        }
    }
    mb.tau2[a][0] = std::move(v);
  }
  return mb;
}

JTensor stress_energy(const Geometry& geo, const MapBundle& mb) {
  const int m = geo.m;
  JTensor T(m, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) T(i, j) = mb.pullback(i, j) - mb.energy * geo.g()(i, j);
  return T;
}

JTensor stress_energy_2(const Geometry& geo, const MapBundle& mb) {
  const int m = geo.m;
  if (!mb.has_dtau()) throw JetError("jet order budget exhausted: T2 needs map order >= 3");
  JTensor tp(m, 2);  // <τ_i, φ_j>
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) tp(i, j) = target_dot(mb, mb.dtau, i, mb.dphi, j);
  Jet e2 = target_dot(mb, mb.tau, 0, mb.tau, 0) * 0.5;
  Jet tr = trace2(tp, geo.ginv());
  Jet c = e2 + tr;
  JTensor T(m, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) T(i, j) = tp(i, j) + tp(j, i) - c * geo.g()(i, j);
  return T;
}

JTensor divergence2(const JTensor& T, const Geometry& geo) {
  const int m = geo.m;
  JTensor dT = covariant_derivative(T, geo.gamma);
  JTensor out(m, 1);
  for (int mu = 0; mu < m; ++mu) {
    Jet v(dT[0].vars(), dT[0].order(), 0.0);
    for (int nu = 0; nu < m; ++nu)
      for (int k = 0; k < m; ++k) v.add_product(geo.ginv()(nu, k), dT(mu, nu, k));
    out(mu) = std::move(v);
  }
  return out;
}

ConservationResiduals conservation_residuals(const MetricField& g, const MapField& phi, const std::vector<double>& p) {
  Geometry geo = compute_geometry(g, p, 5, false);
  MapBundle mb = compute_map_bundle(phi, geo, p, 5);
  const int m = geo.m;
  ConservationResiduals r;
  JTensor d1 = divergence2(stress_energy(geo, mb), geo);
  JTensor d2 = divergence2(stress_energy_2(geo, mb), geo);
  for (int mu = 0; mu < m; ++mu) {
    double t1 = target_dot(mb, mb.tau, 0, mb.dphi, mu).value();
    double t2 = target_dot(mb, mb.tau2, 0, mb.dphi, mu).value();
    r.r1 = std::max(r.r1, std::abs(d1(mu).value() - t1));
    r.r2 = std::max(r.r2, std::abs(d2(mu).value() - t2));
  }
  return r;
}

}  // namespace phg
