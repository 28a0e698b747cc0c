#include "phg/phicurv.hpp"

#include <algorithm>
#include <cmath>

namespace phg {

namespace {

Jet zero_like(const Jet& ref, int K) { return Jet(ref.vars(), std::max(K, 0), 0.0); }

// g^{ia} g^{jb} T_ab
JTensor raise_both(const JTensor& T, const JTensor& gi) {
  const int m = T.dim();
  JTensor mix = raise_first(T, gi);  // T^i_b
  JTensor out(m, 2);
  out.set_upper({true, true});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Jet v = zero_like(mix[0], std::min(min_order(mix), gi[0].order()));
      for (int b = 0; b < m; ++b) v.add_product(mix(i, b), gi(b, j));
      out(i, j) = std::move(v);
    }
  return out;
}

// (T²)_{ij} = g^{kt} T_ik T_tj
JTensor square2(const JTensor& T, const JTensor& gi) {
  const int m = T.dim();
  JTensor mix = raise_first(T, gi);  // T^t_j
  JTensor out(m, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Jet v = zero_like(T[0], std::min(min_order(T), min_order(mix)));
      for (int t = 0; t < m; ++t) v.add_product(T(i, t), mix(t, j));
      out(i, j) = std::move(v);
    }
  return out;
}

// g^{kt} X_{...k...t} contracting the two trailing slots of a rank-r tensor
JTensor trace_last_two(const JTensor& X, const JTensor& gi) {
  const int m = X.dim();
  const int r = X.rank();
  JTensor out(m, r - 2);
  const std::size_t stride = static_cast<std::size_t>(m) * m;
  for (std::size_t f = 0; f < out.size(); ++f) {
    Jet v = zero_like(X[0], std::min(min_order(X), gi[0].order()));
    for (int k = 0; k < m; ++k)
      for (int t = 0; t < m; ++t) v.add_product(gi(k, t), X[f * stride + k * m + t]);
    out[f] = std::move(v);
  }
  return out;
}

}  // namespace

PhiBundle compute_phi(const MetricField& g, const MapField& phi, double alpha, const std::vector<double>& p, int K,
                      PhiOptions opt) {
  if (K < 2) throw JetError("jet order budget exhausted: φ-curvature needs order >= 2");
  PhiBundle b;
  b.K = K;
  b.alpha = alpha;
  b.geo = compute_geometry(g, p, K, true);
  b.m = b.geo.m;
  b.map = compute_map_bundle(phi, b.geo, p, K);
  const int m = b.m;
  const JTensor& gg = b.geo.g();
  const JTensor& gi = b.geo.ginv();

  b.ric_phi = JTensor(m, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) b.ric_phi(i, j) = b.geo.ric(i, j) - alpha * b.map.pullback(i, j);
  b.s_phi = trace2(b.ric_phi, gi);
  b.ric_phi_mix = raise_first(b.ric_phi, gi);
  b.ric_phi_up = raise_both(b.ric_phi, gi);
  b.stress = stress_energy(b.geo, b.map);

  if (m < 3) return b;
  const double cs = 1.0 / (2.0 * (m - 1));
  b.schouten = JTensor(m, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) b.schouten(i, j) = b.ric_phi(i, j) - cs * b.s_phi * gg(i, j);

  JTensor kn = kulkarni_nomizu(b.schouten, gg);
  b.weyl = JTensor(m, 4);
  for (std::size_t f = 0; f < kn.size(); ++f) b.weyl[f] = b.geo.riem[f] - kn[f] * (1.0 / (m - 2));

  if (K < 3) return b;
  JTensor dA = covariant_derivative(b.schouten, b.geo.gamma);
  b.cotton = JTensor(m, 3);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) b.cotton(i, j, k) = dA(i, j, k) - dA(i, k, j);

  if (K < 4) return b;
  b.bach = bach_definition(b);
  if (opt.bach_alt) b.bach_alt = bach_alternative(b);
  b.J = j_tensor(b, alpha);

  if (K < 5 || !opt.div_bach) return b;
  JTensor dB = covariant_derivative(b.bach, b.geo.gamma);
  b.div_bach = trace_last_two(dB, gi);
  return b;
}

JTensor bach_definition(const PhiBundle& b) {
  const int m = b.m;
  const double al = b.alpha;
  const JTensor& gg = b.geo.g();
  const JTensor& gi = b.geo.ginv();
  const MapBundle& mb = b.map;
  JTensor dC = covariant_derivative(b.cotton, b.geo.gamma);
  JTensor divC = trace_last_two(dC, gi);  // g^{kt} C_{ijk,t}
  Jet tt = target_dot(mb, mb.tau, 0, mb.tau, 0);

  JTensor B(m, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Jet v = divC(i, j);
      for (int t = 0; t < m; ++t)
        for (int k = 0; k < m; ++k) v.add_product(b.ric_phi_up(t, k), b.weyl(t, i, k, j));
      // − α (R^φ)^t_j ⟨φ_t, φ_i⟩
      for (int t = 0; t < m; ++t) v.add_product(b.ric_phi_mix(t, j), mb.pullback(t, i), -al);
      Jet extra = target_dot(mb, mb.ddphi, i * m + j, mb.tau, 0) - target_dot(mb, mb.dtau, j, mb.dphi, i) -
                  tt * gg(i, j) * (1.0 / (m - 2));
      v += al * extra;
      B(i, j) = v * (1.0 / (m - 2));
    }
  return B;
}

JTensor bach_alternative(const PhiBundle& b) {
  const int m = b.m;
  const double al = b.alpha;
  const JTensor& gg = b.geo.g();
  const JTensor& gi = b.geo.ginv();
  const MapBundle& mb = b.map;
  JTensor dR = covariant_derivative(b.ric_phi, b.geo.gamma);
  JTensor ddR = covariant_derivative(dR, b.geo.gamma);
  JTensor lapR = trace_last_two(ddR, gi);
  JTensor dS = covariant_derivative(b.s_phi, m);
  JTensor hessS = covariant_derivative(dS, b.geo.gamma);
  Jet lapS = trace2(hessS, gi);
  JTensor R2 = square2(b.ric_phi, gi);
  Jet norm2 = inner2(b.ric_phi, b.ric_phi, gi);
  Jet tt = target_dot(mb, mb.tau, 0, mb.tau, 0);
  const Jet& S = b.s_phi;

  const double md = m;
  const double c_hess = (md - 2) / (2 * (md - 1));
  const double c_sq = (md - 4) / (md - 2);
  const double c_sr = md / ((md - 1) * (md - 2));
  Jet scal = S * S * (1.0 / ((md - 1) * (md - 2))) - lapS * (1.0 / (2 * (md - 1))) - norm2 * (1.0 / (md - 2)) -
             tt * (al / (md - 2));

  JTensor B(m, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Jet v = lapR(i, j) - c_hess * hessS(i, j) - c_sq * R2(i, j) - c_sr * S * b.ric_phi(i, j);
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) v.add_product(b.geo.riem(k, i, t, j), b.ric_phi_up(k, t), 2.0);
      v.add_product(scal, gg(i, j));
      Jet a = target_dot(mb, mb.ddphi, i * m + j, mb.tau, 0) * 2.0;
      for (int k = 0; k < m; ++k) {
        a.add_product(b.ric_phi_mix(k, i), mb.pullback(j, k), -1.0);
        a.add_product(b.ric_phi_mix(k, j), mb.pullback(i, k), -1.0);
      }
      v += al * a;
      B(i, j) = v * (1.0 / (md - 2));
    }
  return B;
}

Section j_tensor(const PhiBundle& b, double quadratic_coupling) {
  const int m = b.m, n = b.map.n;
  const double md = m;
  const JTensor& gi = b.geo.ginv();
  const MapBundle& mb = b.map;
  JTensor dS = covariant_derivative(b.s_phi, m);
  // ⟨τ, φ_j⟩
  std::vector<Jet> tphi(m);
  for (int j = 0; j < m; ++j) tphi[j] = target_dot(mb, mb.tau, 0, mb.dphi, j);

  Section J(n);
  for (int a = 0; a < n; ++a) {
    Jet v = b.s_phi * mb.tau[a][0] * (md / ((md - 1) * (md - 2))) - mb.tau2[a][0];
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        Jet gk = gi(j, k) * mb.dphi[a][k];
        v.add_product(dS(j), gk, -(md - 2) / (2 * (md - 1)));
        v.add_product(b.ric_phi_up(j, k), mb.ddphi[a](j, k), -2.0);
        v.add_product(tphi[j], gk, 2.0 * quadratic_coupling);
      }
    J[a] = JTensor(m, 0);
    J[a][0] = std::move(v);
  }
  return J;
}

JTensor div_bach_rhs(const PhiBundle& b, const Section& J) {
  const int m = b.m, n = b.map.n;
  const double md = m;
  const double al = b.alpha;
  const MapBundle& mb = b.map;
  JTensor out(m, 1);
  for (int i = 0; i < m; ++i) {
    // R^{jk} C_{jki}
    Jet c = zero_like(b.cotton[0], min_order(b.cotton));
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) c.add_product(b.ric_phi_up(j, k), b.cotton(j, k, i));
    Jet t = target_dot(mb, mb.dtau, i, mb.tau, 0);
    for (int j = 0; j < m; ++j) t.add_product(b.ric_phi_mix(j, i), target_dot(mb, mb.dphi, j, mb.tau, 0));
    Jet v = (c + al * t) * ((md - 4) / (md - 2));
    for (int a = 0; a < n; ++a)
      for (int c2 = 0; c2 < n; ++c2) {
        if (mb.target.gamma.empty() && mb.target.eta(a, c2).value() == 0.0) continue;
        v.add_product(mb.target.eta(a, c2) * J[a][0], mb.dphi[c2][i], al);
      }
    out(i) = std::move(v);
  }
  return out;
}

HarmonicEinsteinResidual harmonic_einstein_residual(const PhiBundle& b) {
  HarmonicEinsteinResidual r;
  const int m = b.m;
  const double sm = b.s_phi.value();
  DTensor g = values(b.geo.g());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      r.traceless_ricci = std::max(r.traceless_ricci, std::abs(b.ric_phi(i, j).value() - sm / m * g(i, j)));
  if (b.map.has_tau())
    for (const auto& t : b.map.tau) r.tension = std::max(r.tension, std::abs(t[0].value()));
  // G + Λ g − α T with Λ = (m−2)S^φ/(2m)
  const double S = b.geo.scalar.value();
  const double lam = (m - 2) * sm / (2.0 * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double G = b.geo.ric(i, j).value() - 0.5 * S * g(i, j);
      r.field = std::max(r.field, std::abs(G + lam * g(i, j) - b.alpha * b.stress(i, j).value()));
    }
  return r;
}

}  // namespace phg

namespace phg {

namespace {

double vmax(double a, const Jet& j) { return std::max(a, std::abs(j.value())); }

}  // namespace

IdentityResiduals identity_residuals(const PhiBundle& b) {
  IdentityResiduals r;
  const int m = b.m;
  const double md = m;
  const double al = b.alpha;
  const JTensor& gg = b.geo.g();
  const JTensor& gi = b.geo.ginv();
  const MapBundle& mb = b.map;
  if (m < 3) return r;

  r.weyl_trace = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Jet v = -al * mb.pullback(i, j);
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) v.add_product(gi(k, t), b.weyl(k, i, t, j));
      r.weyl_trace = vmax(r.weyl_trace, v);
    }
  if (b.K < 3) return r;

  JTensor divT = divergence2(b.stress, b.geo);
  JTensor divR = divergence2(b.ric_phi, b.geo);
  r.schur = r.cotton_cyclic = r.cotton_trace = r.weyl_div = 0;
  for (int i = 0; i < m; ++i) {
    r.schur = vmax(r.schur, divR(i) - 0.5 * b.s_phi.derivative(i) + al * divT(i));
    Jet tr = -al * divT(i);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        tr.add_product(gi(j, k), b.cotton(j, k, i));
        r.cotton_cyclic = vmax(r.cotton_cyclic, b.cotton(i, j, k) + b.cotton(j, k, i) + b.cotton(k, i, j));
      }
    r.cotton_trace = vmax(r.cotton_trace, tr);
  }

  JTensor dW = covariant_derivative(b.weyl, b.geo.gamma);
  std::vector<Jet> tphi(m);
  for (int j = 0; j < m; ++j) tphi[j] = target_dot(mb, mb.tau, 0, mb.dphi, j);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        Jet v = -((md - 3) / (md - 2)) * b.cotton(i, k, j);
        v -= al * (target_dot(mb, mb.ddphi, i * m + j, mb.dphi, k) - target_dot(mb, mb.ddphi, i * m + k, mb.dphi, j));
        v -= (al / (md - 2)) * (tphi[j] * gg(i, k) - tphi[k] * gg(i, j));
        for (int t = 0; t < m; ++t)
          for (int s = 0; s < m; ++s) v.add_product(gi(t, s), dW(t, i, j, k, s));
        r.weyl_div = vmax(r.weyl_div, v);
      }
  if (b.K < 4) return r;

  JTensor dC = covariant_derivative(b.cotton, b.geo.gamma);
  r.cotton_div = r.bach_sym = r.bach_routes = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Jet v = target_dot(mb, mb.dtau, i, mb.dphi, j) - target_dot(mb, mb.dtau, j, mb.dphi, i);
      for (int k = 0; k < m; ++k) {
        v.add_product(b.ric_phi_mix(k, i), mb.pullback(k, j));
        v.add_product(b.ric_phi_mix(k, j), mb.pullback(k, i), -1.0);
      }
      v *= -al;
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) v.add_product(gi(k, t), dC(k, i, j, t));
      r.cotton_div = vmax(r.cotton_div, v);
      r.bach_sym = vmax(r.bach_sym, b.bach(i, j) - b.bach(j, i));
      if (!b.bach_alt.empty()) r.bach_routes = vmax(r.bach_routes, b.bach(i, j) - b.bach_alt(i, j));
    }
  if (b.bach_alt.empty()) r.bach_routes = -1;
  Jet tt = target_dot(mb, mb.tau, 0, mb.tau, 0);
  r.bach_trace = std::abs((md - 2) * trace2(b.bach, gi).value() - al * (md - 4) / (md - 2) * tt.value());
  if (b.div_bach.empty()) return r;

  JTensor rhs = div_bach_rhs(b, b.J);
  JTensor lit = div_bach_rhs(b, j_tensor(b, 1.0));
  r.div_bach = r.div_bach_literal = 0;
  if (m == 4) r.div_bach_j = 0;
  for (int i = 0; i < m; ++i) {
    r.div_bach = std::max(r.div_bach, std::abs((md - 2) * b.div_bach(i).value() - rhs(i).value()));
    r.div_bach_literal = std::max(r.div_bach_literal, std::abs(b.div_bach(i).value() - lit(i).value()));
    if (m == 4) {
      double jp = 0;
      for (int a = 0; a < mb.n; ++a)
        for (int c = 0; c < mb.n; ++c)
          jp += mb.target.eta(a, c).value() * b.J[a][0].value() * mb.dphi[c][i].value();
      r.div_bach_j = std::max(r.div_bach_j, std::abs((md - 2) * b.div_bach(i).value() - al * jp));
    }
  }
  return r;
}

}  // namespace phg
