#include "phg/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phg {

MetricField conformal_metric(const MetricField& g, const ScalarField& h) {
  MetricField out;
  out.dim = g.dim;
  auto ge = g.eval;
  auto he = h.eval;
  out.eval = [ge, he](const CoordJets& x) {
    std::vector<Jet> c = ge(x);
    Jet w = exp(he(x) * -2.0);
    for (auto& j : c) j = j * w;
    return c;
  };
  return out;
}

namespace {

// Frame components of everything a law may touch. Target indices stay in
// target coordinates; target contractions use η_ab(φ(p)).
struct FrameView {
  int m = 0, n = 0;
  std::vector<double> eta;  // source signs
  DTensor teta;             // η_ab(φ(p))
  DTensor riem, ric_phi, schouten, weyl, cotton, divC, bach;
  double s_phi = 0.0;
  std::vector<DTensor> dphi, ddphi, dtau;
  std::vector<double> tau;
  double vol = 0.0;

  double dot(const std::vector<double>& u, const std::vector<double>& v) const {
    double s = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) s += teta(a, b) * u[a] * v[b];
    return s;
  }
  std::vector<double> dphi_i(int i) const {
    std::vector<double> v(n);
    for (int a = 0; a < n; ++a) v[a] = dphi[a](i);
    return v;
  }
  std::vector<double> ddphi_ij(int i, int j) const {
    std::vector<double> v(n);
    for (int a = 0; a < n; ++a) v[a] = ddphi[a](i, j);
    return v;
  }
  std::vector<double> dtau_i(int i) const {
    std::vector<double> v(n);
    for (int a = 0; a < n; ++a) v[a] = dtau[a](i);
    return v;
  }
};

JTensor div_last(const JTensor& X, const JTensor& gi) {
  // g^{kt} ∇_t X_{..k} with X's derivative already appended: contract last two slots
  const int m = X.dim();
  JTensor out(m, X.rank() - 2);
  const std::size_t st = static_cast<std::size_t>(m) * m;
  for (std::size_t f = 0; f < out.size(); ++f) {
    Jet v(X[0].vars(), std::min(min_order(X), gi[0].order()), 0.0);
    for (int k = 0; k < m; ++k)
      for (int t = 0; t < m; ++t) v.add_product(gi(k, t), X[f * st + k * m + t]);
    out[f] = v;
  }
  return out;
}

FrameView project(const PhiBundle& b, const Frame& F, int depth) {
  FrameView v;
  v.m = b.m;
  v.n = b.map.n;
  v.eta = F.eta;
  v.teta = values(b.map.target.eta);
  v.riem = frame_components(values(b.geo.riem), F);
  v.ric_phi = frame_components(values(b.ric_phi), F);
  v.s_phi = b.s_phi.value();
  v.vol = b.geo.metric.vol.value();
  for (int a = 0; a < v.n; ++a) {
    v.dphi.push_back(frame_components(values(b.map.dphi[a]), F));
    v.ddphi.push_back(frame_components(values(b.map.ddphi[a]), F));
    v.tau.push_back(b.map.tau[a][0].value());
    if (depth >= 3) v.dtau.push_back(frame_components(values(b.map.dtau[a]), F));
  }
  if (b.m >= 3) {
    v.schouten = frame_components(values(b.schouten), F);
    v.weyl = frame_components(values(b.weyl), F);
  }
  if (depth >= 3 && b.m >= 3) v.cotton = frame_components(values(b.cotton), F);
  if (depth >= 4 && b.m >= 3) {
    JTensor dC = covariant_derivative(b.cotton, b.geo.gamma);
    v.divC = frame_components(values(div_last(dC, b.geo.ginv())), F);
    v.bach = frame_components(values(b.bach), F);
  }
  return v;
}

// derivatives of a scalar in the frame: first, Hessian, |∇|², Δ
struct FrameScalar {
  std::vector<double> d;  // h_i
  DTensor H;              // h_ij
  double grad2 = 0.0, lap = 0.0;
  double up(int i) const { return d[i]; }
};

FrameScalar frame_scalar(const Jet& hj, const Geometry& geo, const Frame& F) {
  const int m = geo.m;
  JTensor dh = covariant_derivative(hj, m);
  JTensor Hh = covariant_derivative(dh, geo.gamma);
  FrameScalar s;
  DTensor d = frame_components(values(dh), F);
  s.H = frame_components(values(Hh), F);
  s.d.assign(d.data().begin(), d.data().end());
  for (int i = 0; i < m; ++i) {
    s.grad2 += F.eta[i] * s.d[i] * s.d[i];
    s.lap += F.eta[i] * s.H(i, i);
  }
  return s;
}

double diff_max(const DTensor& a, const DTensor& b) { return max_abs_diff(a, b); }

}  // namespace

Residuals conformal_laws(const MetricField& g, const MapField& phi, double alpha, const ScalarField& h,
                         const std::vector<double>& p, int depth) {
  if (depth < 2 || depth > 4) throw std::invalid_argument("conformal law depth must be 2, 3 or 4");
  const int K = depth;
  const int m = g.dim;
  MetricField gt = conformal_metric(g, h);
  PhiOptions opt;
  opt.bach_alt = false;
  opt.div_bach = false;
  PhiBundle b = compute_phi(g, phi, alpha, p, K, opt);
  PhiBundle bt = compute_phi(gt, phi, alpha, p, K, opt);
  Frame F = orthonormal_frame(values(b.geo.g()));
  Jet hj = h.eval(coord_jets(p, K));
  const double h0 = hj.value();
  Frame Ft = F.scaled(std::exp(h0));
  FrameView v = project(b, F, depth), w = project(bt, Ft, depth);
  FrameScalar hs = frame_scalar(hj, b.geo, F);
  const auto& et = F.eta;
  const int n = v.n;
  const double md = m;
  Residuals out;

  // Riemann in paired frames
  {
    double r = 0;
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k)
          for (int t = 0; t < m; ++t) {
            auto E = [&](int a, int c) { return a == c ? et[a] : 0.0; };
            const auto& hd = hs.d;
            double rhs = v.riem(j, i, k, t) +
                         (hs.H(j, k) * E(i, t) - hs.H(t, j) * E(i, k) + hs.H(i, t) * E(j, k) - hs.H(i, k) * E(t, j)) +
                         (hd[j] * hd[k] * E(i, t) - hd[j] * hd[t] * E(i, k) + hd[i] * hd[t] * E(j, k) -
                          hd[i] * hd[k] * E(j, t)) -
                         hs.grad2 * (E(j, k) * E(i, t) - E(j, t) * E(i, k));
            r = std::max(r, std::abs(std::exp(-2 * h0) * w.riem(j, i, k, t) - rhs));
          }
    out.push_back({"riemann", r});
  }
  out.push_back({"volume", std::abs(w.vol - std::exp(-md * h0) * v.vol)});

  // map laws
  {
    double rd = 0, rdd = 0, rt = 0;
    for (int a = 0; a < n; ++a) {
      for (int i = 0; i < m; ++i) rd = std::max(rd, std::abs(w.dphi[a](i) - std::exp(h0) * v.dphi[a](i)));
      double phik_hk = 0;
      for (int k = 0; k < m; ++k) phik_hk += et[k] * v.dphi[a](k) * hs.d[k];
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          double rhs = v.ddphi[a](i, j) + v.dphi[a](i) * hs.d[j] + v.dphi[a](j) * hs.d[i] - (i == j) * et[i] * phik_hk;
          rdd = std::max(rdd, std::abs(w.ddphi[a](i, j) - std::exp(2 * h0) * rhs));
        }
      rt = std::max(rt, std::abs(w.tau[a] - std::exp(2 * h0) * (v.tau[a] - (md - 2) * phik_hk)));
    }
    out.push_back({"dphi", rd});
    out.push_back({"hessian_map", rdd});
    out.push_back({"tension", rt});
  }

  // φ-Ricci (frame and global) and φ-scalar
  {
    double rf = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double rhs = v.ric_phi(i, j) + (md - 2) * hs.H(i, j) + (md - 2) * hs.d[i] * hs.d[j] +
                     (i == j) * et[i] * (hs.lap - (md - 2) * hs.grad2);
        rf = std::max(rf, std::abs(std::exp(-2 * h0) * w.ric_phi(i, j) - rhs));
      }
    out.push_back({"phi_ricci", rf});
    JTensor dh = covariant_derivative(hj, m);
    JTensor Hh = covariant_derivative(dh, b.geo.gamma);
    const double lap = trace2(Hh, b.geo.ginv()).value();
    double g2 = 0;
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < m; ++c) g2 += b.geo.ginv()(a, c).value() * dh(a).value() * dh(c).value();
    double rg = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double rhs = b.ric_phi(i, j).value() + (md - 2) * Hh(i, j).value() + (md - 2) * dh(i).value() * dh(j).value() +
                     (lap - (md - 2) * g2) * b.geo.g()(i, j).value();
        rg = std::max(rg, std::abs(bt.ric_phi(i, j).value() - rhs));
      }
    out.push_back({"phi_ricci_global", rg});
    out.push_back({"phi_scalar", std::abs(std::exp(-2 * h0) * w.s_phi -
                                          (v.s_phi + (md - 1) * (2 * hs.lap - (md - 2) * hs.grad2)))});
  }
  if (m < 3) return out;

  // f = (m−2) h
  const double c2 = 2.0 / (md - 2);
  std::vector<double> fd(m), fu(m);
  DTensor fH(m, 2, 0.0);
  for (int i = 0; i < m; ++i) {
    fd[i] = (md - 2) * hs.d[i];
    fu[i] = et[i] * fd[i];
  }
  for (std::size_t k = 0; k < fH.size(); ++k) fH[k] = (md - 2) * hs.H[k];
  const double f0 = (md - 2) * h0;
  const double fgrad2 = (md - 2) * (md - 2) * hs.grad2;
  const double flap = (md - 2) * hs.lap;
  const double delta_ff = flap - fgrad2;

  {
    double r = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double rhs = v.schouten(i, j) + fH(i, j) + (fd[i] * fd[j] - 0.5 * fgrad2 * (i == j) * et[i]) / (md - 2);
        r = std::max(r, std::abs(std::exp(-c2 * f0) * w.schouten(i, j) - rhs));
      }
    out.push_back({"schouten", r});
    // (0,4) coordinate form: e^{2f/(m−2)} W̃ = W
    DTensor Wt = values(bt.weyl), W = values(b.weyl);
    for (auto& x : Wt.data()) x *= std::exp(c2 * f0);
    out.push_back({"weyl", diff_max(Wt, W)});
  }
  if (depth < 3) return out;

  {
    double r = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          double rhs = v.cotton(i, j, k);
          for (int t = 0; t < m; ++t) rhs += v.weyl(t, i, j, k) * fu[t];
          r = std::max(r, std::abs(std::exp(-3 / (md - 2) * f0) * w.cotton(i, j, k) - rhs));
        }
    out.push_back({"cotton", r});
    // third-derivative law of the map, with h
    double rt = 0;
    for (int a = 0; a < n; ++a) {
      double phi_h = 0;
      for (int i = 0; i < m; ++i) phi_h += et[i] * v.dphi[a](i) * hs.d[i];
      for (int k = 0; k < m; ++k) {
        double rhs = v.dtau[a](k) + 2 * v.tau[a] * hs.d[k] - 2 * (md - 2) * phi_h * hs.d[k];
        for (int i = 0; i < m; ++i)
          rhs -= (md - 2) * et[i] * (v.ddphi[a](i, k) * hs.d[i] + v.dphi[a](i) * hs.H(i, k));
        rt = std::max(rt, std::abs(w.dtau[a](k) - std::exp(3 * h0) * rhs));
      }
    }
    out.push_back({"tension_derivative", rt});
  }
  if (depth < 4) return out;

  // V_ij = η^{kt}C_{ijk,t} − α[(R^φ)^k_j ⟨φ_k, φ_i⟩ + ⟨τ_j, φ_i⟩]
  auto Vof = [&](const FrameView& x) {
    DTensor V(m, 2, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double s = x.dot(x.dtau_i(j), x.dphi_i(i));
        for (int k = 0; k < m; ++k) s += et[k] * x.ric_phi(k, j) * x.dot(x.dphi_i(k), x.dphi_i(i));
        V(i, j) = x.divC(i, j) - alpha * s;
      }
    return V;
  };
  DTensor V = Vof(v), Vt = Vof(w);
  std::vector<double> tau(v.tau);
  std::vector<std::vector<double>> phif(1, std::vector<double>(n, 0.0));  // φ^a_k f^k
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < m; ++k) phif[0][a] += v.dphi[a](k) * fu[k];
  double rv = 0, rb = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double rhs = V(i, j);
      for (int t = 0; t < m; ++t)
        for (int k = 0; k < m; ++k) {
          rhs += et[t] * et[k] * fH(t, k) * v.weyl(t, i, j, k);
          rhs -= (md - 5) / (md - 2) * fu[t] * fu[k] * v.weyl(t, i, j, k);
        }
      for (int k = 0; k < m; ++k) rhs += (md - 4) / (md - 2) * (v.cotton(j, k, i) + v.cotton(i, k, j)) * fu[k];
      rhs += alpha * v.dot(v.ddphi_ij(i, j), phif[0]);
      std::vector<double> pf_minus_tau(n);
      for (int a = 0; a < n; ++a) pf_minus_tau[a] = phif[0][a] - tau[a];
      std::vector<double> mix(n);
      for (int a = 0; a < n; ++a) mix[a] = v.dphi[a](i) * fd[j] + v.dphi[a](j) * fd[i];
      rhs += alpha / (md - 2) *
             (v.dot(pf_minus_tau, mix) - v.dot(tau, phif[0]) * (i == j) * et[i] -
              delta_ff * v.dot(v.dphi_i(i), v.dphi_i(j)));
      rv = std::max(rv, std::abs(std::exp(-4 / (md - 2) * f0) * Vt(i, j) - rhs));

      double rb_rhs = (md - 2) * v.bach(i, j);
      double s = 0;
      for (int k = 0; k < m; ++k) {
        double inner = v.cotton(i, j, k) - v.cotton(j, k, i);
        for (int t = 0; t < m; ++t) inner += fu[t] * v.weyl(t, i, j, k);
        s += fu[k] * inner;
      }
      rb_rhs -= (md - 4) / (md - 2) * s;
      rb = std::max(rb, std::abs(std::exp(-4 / (md - 2) * f0) * (md - 2) * w.bach(i, j) - rb_rhs));
    }
  out.push_back({"v_tensor", rv});
  out.push_back({"bach", rb});
  if (m == 4) {
    DTensor B = values(b.bach), Bt = values(bt.bach);
    for (auto& x : B.data()) x *= std::exp(f0);
    out.push_back({"bach_weighted_m4", diff_max(Bt, B)});
  }
  return out;
}

double delta_f_consistency(const MetricField& g, const MapField& phi, double alpha, const ScalarField& h,
                           const std::vector<double>& p) {
  const int m = g.dim;
  if (m < 3) throw std::invalid_argument("the f-form needs m >= 3");
  PhiBundle b = compute_phi(g, phi, alpha, p, 2);
  PhiBundle bt = compute_phi(conformal_metric(g, h), phi, alpha, p, 2);
  Jet hj = h.eval(coord_jets(p, 2));
  JTensor dh = covariant_derivative(hj, m);
  JTensor Hh = covariant_derivative(dh, b.geo.gamma);
  const double md = m;
  double r = 0;
  const JTensor& gi = b.geo.ginv();
  double lap = trace2(Hh, gi).value() * (md - 2), g2 = 0;
  for (int a = 0; a < m; ++a)
    for (int c = 0; c < m; ++c) g2 += gi(a, c).value() * dh(a).value() * dh(c).value() * (md - 2) * (md - 2);
  const double dff = lap - g2;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double fi = (md - 2) * dh(i).value(), fj = (md - 2) * dh(j).value();
      double rhs = b.ric_phi(i, j).value() + (md - 2) * Hh(i, j).value() +
                   (fi * fj + dff * b.geo.g()(i, j).value()) / (md - 2);
      r = std::max(r, std::abs(bt.ric_phi(i, j).value() - rhs));
    }
  return r;
}

double composition_residual(const MetricField& g, const MapField& phi, double alpha, const Expr& h1, const Expr& h2,
                            const std::vector<double>& p) {
  MetricField g1 = conformal_metric(g, ScalarField::from_expr(h1));
  MetricField g12 = conformal_metric(g1, ScalarField::from_expr(h2));
  MetricField gs = conformal_metric(g, ScalarField::from_expr(h1 + h2));
  PhiBundle a = compute_phi(g12, phi, alpha, p, 2), b = compute_phi(gs, phi, alpha, p, 2);
  return max_abs_diff(values(a.ric_phi), values(b.ric_phi));
}

double surface_density_residual(const MetricField& g, const MapField& phi, double alpha, const ScalarField& h,
                                const std::vector<double>& p) {
  if (g.dim != 2) throw std::invalid_argument("the surface density law needs m = 2");
  PhiBundle b = compute_phi(g, phi, alpha, p, 2);
  PhiBundle bt = compute_phi(conformal_metric(g, h), phi, alpha, p, 2);
  Jet hj = h.eval(coord_jets(p, 2));
  JTensor Hh = covariant_derivative(covariant_derivative(hj, 2), b.geo.gamma);
  const double lap = trace2(Hh, b.geo.ginv()).value();
  const double mu = b.geo.metric.vol.value(), mut = bt.geo.metric.vol.value();
  return std::abs(bt.s_phi.value() * mut - b.s_phi.value() * mu - 2 * lap * mu);
}

ConformalHE conformally_harmonic_einstein(const MetricField& g, const MapField& phi, double alpha,
                                          const ScalarField& f, const std::vector<double>& p) {
  const int m = g.dim;
  if (m < 3) throw std::invalid_argument("conformally harmonic-Einstein needs m >= 3");
  const double md = m;
  PhiBundle b = compute_phi(g, phi, alpha, p, 2);
  Jet fj = f.eval(coord_jets(p, 2));
  JTensor df = covariant_derivative(fj, m);
  JTensor Hf = covariant_derivative(df, b.geo.gamma);
  const JTensor& gi = b.geo.ginv();
  DTensor X(m, 2, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      X(i, j) = b.ric_phi(i, j).value() + Hf(i, j).value() + df(i).value() * df(j).value() / (md - 2);
  double trX = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) trX += gi(i, j).value() * X(i, j);
  ConformalHE r;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      r.traceless = std::max(r.traceless, std::abs(X(i, j) - trX / md * b.geo.g()(i, j).value()));
  for (int a = 0; a < b.map.n; ++a) {
    double dphi_grad = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) dphi_grad += b.map.dphi[a](i).value() * gi(i, j).value() * df(j).value();
    r.tension = std::max(r.tension, std::abs(b.map.tau[a][0].value() - dphi_grad));
  }
  ScalarField h;
  auto fe = f.eval;
  h.eval = [fe, md](const CoordJets& x) { return fe(x) * (1.0 / (md - 2)); };
  PhiBundle bt = compute_phi(conformal_metric(g, h), phi, alpha, p, 2);
  HarmonicEinsteinResidual he = harmonic_einstein_residual(bt);
  r.direct_traceless = he.traceless_ricci;
  r.direct_tension = he.tension;
  return r;
}

double q_density(const PhiBundle& b) {
  const double S = b.s_phi.value();
  double q = S * S / 3.0 - inner2(b.ric_phi, b.ric_phi, b.geo.ginv()).value() -
             b.alpha * target_dot(b.map, b.map.tau, 0, b.map.tau, 0).value();
  return q * b.geo.metric.vol.value();
}

double q_density_residual(const MetricField& g, const MapField& phi, double alpha, const ScalarField& f,
                          const std::vector<double>& p) {
  if (g.dim != 4) throw std::invalid_argument("the Q-density identity needs m = 4");
  const int m = 4;
  PhiBundle b = compute_phi(g, phi, alpha, p, 3);
  ScalarField h;
  auto fe = f.eval;
  h.eval = [fe](const CoordJets& x) { return fe(x) * 0.5; };
  PhiBundle bt = compute_phi(conformal_metric(g, h), phi, alpha, p, 2);
  // P^μ = (S^φ + Δf − ½|∇f|²) ∇^μ f − g^{μa}(2 Ric^φ + Hess f)_{ab} ∇^b f
  Jet fj = f.eval(coord_jets(p, 4));
  JTensor df = covariant_derivative(fj, m);
  JTensor Hf = covariant_derivative(df, b.geo.gamma);
  const JTensor& gi = b.geo.ginv();
  JTensor up(m, 1);
  up.set_upper({true});
  for (int i = 0; i < m; ++i) {
    Jet v(m, 3, 0.0);
    for (int j = 0; j < m; ++j) v.add_product(gi(i, j), df(j));
    up(i) = v;
  }
  Jet lap = trace2(Hf, gi);
  Jet g2(m, 3, 0.0);
  for (int i = 0; i < m; ++i) g2.add_product(df(i), up(i));
  Jet c = b.s_phi + lap - 0.5 * g2;
  JTensor P(m, 1);
  P.set_upper({true});
  for (int i = 0; i < m; ++i) {
    Jet v = c * up(i);
    for (int a = 0; a < m; ++a)
      for (int bb = 0; bb < m; ++bb) v.add_product(gi(i, a), (2.0 * b.ric_phi(a, bb) + Hf(a, bb)) * up(bb), -1.0);
    P(i) = v;
  }
  JTensor dP = covariant_derivative(P, b.geo.gamma);
  double div = 0;
  for (int i = 0; i < m; ++i) div += dP(i, i).value();
  return std::abs(q_density(bt) - q_density(b) - div * b.geo.metric.vol.value());
}

}  // namespace phg
