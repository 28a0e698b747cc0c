#include "phg/warped.hpp"

#include <algorithm>
#include <cmath>

namespace phg {

namespace {

Chart product_chart(const Chart& a, const Chart& b) {
  Chart c;
  c.dim = a.dim + b.dim;
  c.lo = a.lo;
  c.lo.insert(c.lo.end(), b.lo.begin(), b.lo.end());
  c.hi = a.hi;
  c.hi.insert(c.hi.end(), b.hi.begin(), b.hi.end());
  c.periodic = a.periodic;
  c.periodic.insert(c.periodic.end(), b.periodic.begin(), b.periodic.end());
  c.n_pos = a.n_pos + b.n_pos;
  c.n_neg = a.n_neg + b.n_neg;
  return c;
}

CoordJets head(const CoordJets& x, int m) { return CoordJets(x.begin(), x.begin() + m); }
CoordJets tail(const CoordJets& x, int m) { return CoordJets(x.begin() + m, x.end()); }

struct Deriv {
  std::vector<double> d;  // frame first derivatives
  DTensor H;              // frame Hessian
  double grad2 = 0.0, lap = 0.0;
};

Deriv frame_derivs(const Jet& s, const Geometry& geo, const Frame& F) {
  const int m = geo.m;
  JTensor ds = covariant_derivative(s, m);
  JTensor Hs = covariant_derivative(ds, geo.gamma);
  Deriv r;
  DTensor d = frame_components(values(ds), F);
  r.d.assign(d.data().begin(), d.data().end());
  r.H = frame_components(values(Hs), F);
  for (int i = 0; i < m; ++i) {
    r.grad2 += F.eta[i] * r.d[i] * r.d[i];
    r.lap += F.eta[i] * r.H(i, i);
  }
  return r;
}

// All the pieces a check needs, evaluated once at a product point.
struct Data {
  int m = 0, d = 0, n = 0;
  double u = 0.0, f = 0.0;
  Frame Fb, Ff, Fp;  // base, fibre, product frames
  PhiBundle base, prod;
  Geometry fib;
  Deriv du, df;
  DTensor R, Ric, RicPhi;      // base, frame
  DTensor FR, FRic;            // fibre, fibre frame
  double S = 0, SPhi = 0, FS = 0;
  DTensor bR, bRic, bRicPhi;   // product, product frame
  double bS = 0, bSPhi = 0;
};

Frame product_frame(const Frame& Fb, const Frame& Ff, double u) {
  const int m = Fb.m, d = Ff.m;
  Frame F;
  F.m = m + d;
  F.e = Eigen::MatrixXd::Zero(m + d, m + d);
  F.theta = Eigen::MatrixXd::Zero(m + d, m + d);
  F.e.topLeftCorner(m, m) = Fb.e;
  F.e.bottomRightCorner(d, d) = Ff.e / u;
  F.theta.topLeftCorner(m, m) = Fb.theta;
  F.theta.bottomRightCorner(d, d) = Ff.theta * u;
  F.eta = Fb.eta;
  F.eta.insert(F.eta.end(), Ff.eta.begin(), Ff.eta.end());
  return F;
}

Data gather(const WarpedScenario& ws, const std::vector<double>& P) {
  if (static_cast<int>(P.size()) != ws.m + ws.d) throw WarpedError("product point has the wrong dimension");
  Data D;
  D.m = ws.m;
  D.d = ws.d;
  D.n = ws.m + ws.d;
  const auto p = ws.base_point(P);
  const auto q = ws.fiber_point(P);
  Jet uj = ws.u.eval(coord_jets(p, 2));
  D.u = uj.value();
  if (!(D.u >= kWarpMargin)) throw WarpedError("warping function below the margin at the sample");
  Jet fj = log(uj) * -static_cast<double>(ws.d);
  D.f = fj.value();

  D.base = compute_phi(ws.base, ws.phi, ws.alpha, p, 2, {false, false});
  D.prod = compute_phi(ws.product, ws.lifted, ws.alpha, P, 2, {false, false});
  D.fib = compute_geometry(ws.fiber, q, 2);

  D.Fb = orthonormal_frame(values(D.base.geo.g()));
  D.Ff = orthonormal_frame(values(D.fib.g()));
  D.Fp = product_frame(D.Fb, D.Ff, D.u);

  D.du = frame_derivs(uj, D.base.geo, D.Fb);
  D.df = frame_derivs(fj, D.base.geo, D.Fb);

  D.R = frame_components(values(D.base.geo.riem), D.Fb);
  D.Ric = frame_components(values(D.base.geo.ric), D.Fb);
  D.RicPhi = frame_components(values(D.base.ric_phi), D.Fb);
  D.S = D.base.geo.scalar.value();
  D.SPhi = D.base.s_phi.value();
  D.FR = frame_components(values(D.fib.riem), D.Ff);
  D.FRic = frame_components(values(D.fib.ric), D.Ff);
  D.FS = D.fib.scalar.value();
  D.bR = frame_components(values(D.prod.geo.riem), D.Fp);
  D.bRic = frame_components(values(D.prod.geo.ric), D.Fp);
  D.bRicPhi = frame_components(values(D.prod.ric_phi), D.Fp);
  D.bS = D.prod.geo.scalar.value();
  D.bSPhi = D.prod.s_phi.value();
  return D;
}

// block of a multi-index: 0 all base, 2 all fibre, 1 mixed
int block_of(const int* idx, int r, int m) {
  int nb = 0;
  for (int s = 0; s < r; ++s) nb += idx[s] < m;
  return nb == r ? 0 : (nb == 0 ? 2 : 1);
}

BlockReport compare(const std::string& name, const DTensor& direct, const DTensor& pred, int m) {
  BlockReport b;
  b.tensor = name;
  std::vector<int> idx(direct.rank());
  for (std::size_t f = 0; f < direct.size(); ++f) {
    direct.unflatten(f, idx.data());
    const double e = std::abs(direct[f] - pred[f]);
    switch (block_of(idx.data(), direct.rank(), m)) {
      case 0: b.base_base = std::max(b.base_base, e); break;
      case 1: b.mixed = std::max(b.mixed, e); break;
      default: b.fiber_fiber = std::max(b.fiber_fiber, e);
    }
  }
  return b;
}

DTensor predicted_riemann(const Data& D) {
  const int m = D.m, n = D.n;
  const auto& eta = D.Fp.eta;
  DTensor out(n, 4, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) out(i, j, k, t) = D.R(i, j, k, t);
  for (int a = 0; a < D.d; ++a)
    for (int b = 0; b < D.d; ++b)
      for (int c = 0; c < D.d; ++c)
        for (int e = 0; e < D.d; ++e) {
          const double ea = eta[m + a], eb = eta[m + b];
          const double g = (a == c && b == e ? ea * eb : 0.0) - (a == e && b == c ? ea * eb : 0.0);
          out(m + a, m + b, m + c, m + e) = D.FR(a, b, c, e) / (D.u * D.u) - D.du.grad2 / (D.u * D.u) * g;
        }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int a = 0; a < D.d; ++a) {
        const double v = -D.du.H(i, j) / D.u * eta[m + a];
        out(i, m + a, j, m + a) = v;
        out(m + a, i, m + a, j) = v;
        out(i, m + a, m + a, j) = -v;
        out(m + a, i, j, m + a) = -v;
      }
  return out;
}

// Ricci blocks; with_phi swaps in Ric^φ on the base block
DTensor predicted_ricci(const Data& D, bool with_phi, WarpForm form) {
  const int m = D.m, n = D.n;
  const double dd = D.d;
  const auto& eta = D.Fp.eta;
  const DTensor& base = with_phi ? D.RicPhi : D.Ric;
  DTensor out(n, 2, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      out(i, j) = form == WarpForm::u ? base(i, j) - dd * D.du.H(i, j) / D.u
                                      : base(i, j) + D.df.H(i, j) - D.df.d[i] * D.df.d[j] / dd;
  const double u2 = D.u * D.u;
  for (int a = 0; a < D.d; ++a)
    for (int b = 0; b < D.d; ++b) {
      const double e = a == b ? eta[m + a] : 0.0;
      if (form == WarpForm::u)
        out(m + a, m + b) = -(D.du.lap / D.u + (dd - 1) * D.du.grad2 / u2) * e + D.FRic(a, b) / u2;
      else
        out(m + a, m + b) = (D.df.lap - D.df.grad2) / dd * e + std::exp(2 * D.f / dd) * D.FRic(a, b);
    }
  return out;
}

double predicted_scalar(const Data& D, bool with_phi, WarpForm form) {
  const double dd = D.d;
  const double S = with_phi ? D.SPhi : D.S;
  if (form == WarpForm::u)
    return S + D.FS / (D.u * D.u) - dd * (2 * D.du.lap / D.u + (dd - 1) * D.du.grad2 / (D.u * D.u));
  return S + std::exp(2 * D.f / dd) * D.FS + 2 * D.df.lap - (dd + 1) / dd * D.df.grad2;
}

std::vector<BlockReport> scalar_reports(const Data& D, WarpForm form) {
  BlockReport s, sp;
  s.tensor = "scalar";
  s.base_base = std::abs(D.bS - predicted_scalar(D, false, form));
  sp.tensor = "phi_scalar";
  sp.base_base = std::abs(D.bSPhi - predicted_scalar(D, true, form));
  return {s, sp};
}

std::string suffix(WarpForm form) { return form == WarpForm::u ? "_u" : "_f"; }

// dφ(∇s)^a in the frame
std::vector<double> push_gradient(const PhiBundle& b, const Frame& F, const std::vector<double>& ds) {
  const int n = b.map.n;
  std::vector<double> v(n, 0.0);
  for (int a = 0; a < n; ++a) {
    DTensor da = frame_components(values(b.map.dphi[a]), F);
    for (int i = 0; i < b.m; ++i) v[a] += F.eta[i] * da(i) * ds[i];
  }
  return v;
}

double frame_max(const DTensor& t) { return max_abs(t); }

}  // namespace

double WarpedScenario::u_at(const std::vector<double>& P) const { return u.value_at(base_point(P)); }

std::vector<double> WarpedScenario::base_point(const std::vector<double>& P) const {
  return std::vector<double>(P.begin(), P.begin() + m);
}

std::vector<double> WarpedScenario::fiber_point(const std::vector<double>& P) const {
  return std::vector<double>(P.begin() + m, P.end());
}

WarpedScenario build_warped(const Chart& base_chart, const MetricField& g, const MapField& phi, double alpha,
                            const Chart& fiber_chart, const MetricField& g_F, const ScalarField& u,
                            const std::vector<std::vector<double>>& base_samples) {
  if (g.dim < 1 || g_F.dim < 1) throw WarpedError("base and fibre need positive dimension");
  if (g.dim + g_F.dim > kMaxVars) throw WarpedError("product dimension exceeds the jet variable limit");
  if (phi.src_dim != g.dim) throw WarpedError("map source dimension differs from the base");
  for (const auto& p : base_samples) {
    const double v = u.value_at(p);
    if (!(v > 0.0)) throw WarpedError("warping function is not positive at a sample");
    if (v < kWarpMargin) throw WarpedError("warping function too close to zero at a sample");
  }
  WarpedScenario ws;
  ws.m = g.dim;
  ws.d = g_F.dim;
  ws.base_chart = base_chart;
  ws.fiber_chart = fiber_chart;
  ws.chart = product_chart(base_chart, fiber_chart);
  ws.base = g;
  ws.fiber = g_F;
  ws.phi = phi;
  ws.alpha = alpha;
  ws.u = u;

  const int m = ws.m, d = ws.d, n = m + d;
  auto ge = g.eval, fe = g_F.eval;
  auto ue = u.eval;
  ws.product.dim = n;
  ws.product.eval = [=](const CoordJets& x) {
    std::vector<Jet> gb = ge(head(x, m));
    std::vector<Jet> gf = fe(tail(x, m));
    Jet uj = ue(head(x, m));
    Jet u2 = uj * uj;
    std::vector<Jet> out(n * n, Jet(x[0].vars(), x[0].order(), 0.0));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) out[i * n + j] = gb[i * m + j];
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) out[(m + a) * n + m + b] = u2 * gf[a * d + b];
    return out;
  };
  auto pe = phi.eval;
  ws.lifted.src_dim = n;
  ws.lifted.target = phi.target;
  ws.lifted.eval = [=](const CoordJets& x) { return pe(head(x, m)); };
  return ws;
}

WarpedScenario build_warped_f(const Chart& base_chart, const MetricField& g, const MapField& phi, double alpha,
                              const Chart& fiber_chart, const MetricField& g_F, const ScalarField& f,
                              const std::vector<std::vector<double>>& base_samples) {
  const double d = g_F.dim;
  ScalarField u;
  auto fe = f.eval;
  u.eval = [fe, d](const CoordJets& x) { return exp(fe(x) * (-1.0 / d)); };
  return build_warped(base_chart, g, phi, alpha, fiber_chart, g_F, u, base_samples);
}

double BlockReport::max() const { return std::max({base_base, mixed, fiber_fiber}); }

double WarpedBlocks::max() const {
  double v = 0.0;
  for (const auto& r : reports) v = std::max(v, r.max());
  return v;
}

BlockReport check_warped_riemann(const WarpedScenario& ws, const std::vector<double>& P) {
  Data D = gather(ws, P);
  return compare("riemann", D.bR, predicted_riemann(D), D.m);
}

BlockReport check_warped_ricci(const WarpedScenario& ws, const std::vector<double>& P, WarpForm form) {
  Data D = gather(ws, P);
  return compare("ricci" + suffix(form), D.bRic, predicted_ricci(D, false, form), D.m);
}

BlockReport check_warped_phi_ricci(const WarpedScenario& ws, const std::vector<double>& P, WarpForm form) {
  Data D = gather(ws, P);
  return compare("phi_ricci" + suffix(form), D.bRicPhi, predicted_ricci(D, true, form), D.m);
}

std::vector<BlockReport> check_warped_scalar(const WarpedScenario& ws, const std::vector<double>& P, WarpForm form) {
  return scalar_reports(gather(ws, P), form);
}

WarpedBlocks check_warped_all(const WarpedScenario& ws, const std::vector<double>& P) {
  Data D = gather(ws, P);
  WarpedBlocks out;
  out.reports.push_back(compare("riemann", D.bR, predicted_riemann(D), D.m));
  for (WarpForm form : {WarpForm::u, WarpForm::f}) {
    out.reports.push_back(compare("ricci" + suffix(form), D.bRic, predicted_ricci(D, false, form), D.m));
    out.reports.push_back(compare("phi_ricci" + suffix(form), D.bRicPhi, predicted_ricci(D, true, form), D.m));
    for (auto r : scalar_reports(D, form)) {
      r.tensor += suffix(form);
      out.reports.push_back(r);
    }
  }
  for (bool ph : {false, true}) {
    out.form_gap = std::max(out.form_gap, max_abs_diff(predicted_ricci(D, ph, WarpForm::u),
                                                       predicted_ricci(D, ph, WarpForm::f)));
    out.form_gap = std::max(out.form_gap, std::abs(predicted_scalar(D, ph, WarpForm::u) -
                                                   predicted_scalar(D, ph, WarpForm::f)));
  }
  return out;
}

Residuals check_lifted_map(const WarpedScenario& ws, const std::vector<double>& P) {
  Data D = gather(ws, P);
  const int n = D.prod.map.n;
  double fib = 0.0;
  for (int a = 0; a < n; ++a) {
    DTensor da = frame_components(values(D.prod.map.dphi[a]), D.Fp);
    for (int al = 0; al < D.d; ++al) fib = std::max(fib, std::abs(da(D.m + al)));
  }
  const double energy = std::abs(D.prod.map.energy.value() - D.base.map.energy.value());

  const auto pu = push_gradient(D.base, D.Fb, D.du.d);
  const auto pf = push_gradient(D.base, D.Fb, D.df.d);
  double tu = 0.0, tf = 0.0, forms = 0.0;
  for (int a = 0; a < n; ++a) {
    const double tau = D.base.map.tau[a][0].value();
    const double bar = D.prod.map.tau[a][0].value();
    const double via_u = tau + D.d * pu[a] / D.u;
    const double via_f = tau - pf[a];
    tu = std::max(tu, std::abs(bar - via_u));
    tf = std::max(tf, std::abs(bar - via_f));
    forms = std::max(forms, std::abs(via_u - via_f));
  }
  return {{"fiber_dphi", fib}, {"energy", energy}, {"tension_u", tu}, {"tension_f", tf}, {"tension_forms", forms}};
}

Residuals harmonic_einstein_warped_check(const WarpedScenario& ws, double lambda, double Lambda,
                                         const std::vector<double>& P) {
  Data D = gather(ws, P);
  const int m = D.m, d = D.d, n = D.n;
  const double c = lambda / (m + d);

  DTensor sys(m, 2, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      sys(i, j) = D.RicPhi(i, j) + D.df.H(i, j) - D.df.d[i] * D.df.d[j] / d - (i == j ? c * D.Fb.eta[i] : 0.0);

  const auto pf = push_gradient(D.base, D.Fb, D.df.d);
  double ten = 0.0, bten = 0.0;
  for (int a = 0; a < D.base.map.n; ++a) {
    ten = std::max(ten, std::abs(D.base.map.tau[a][0].value() - pf[a]));
    bten = std::max(bten, std::abs(D.prod.map.tau[a][0].value()));
  }

  DTensor fe(d, 2, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) fe(a, b) = D.FRic(a, b) - (a == b ? Lambda / d * D.Ff.eta[a] : 0.0);

  const double constraint = (D.df.lap - D.df.grad2) - d * c + Lambda * std::exp(2 * D.f / d);

  DTensor prod(n, 2, 0.0);
  for (int A = 0; A < n; ++A)
    for (int B = 0; B < n; ++B) prod(A, B) = D.bRicPhi(A, B) - (A == B ? c * D.Fp.eta[A] : 0.0);

  return {{"base_system", frame_max(sys)},
          {"base_tension", ten},
          {"fiber_einstein", frame_max(fe)},
          {"fiber_scalar", std::abs(D.FS - Lambda)},
          {"constraint", std::abs(constraint)},
          {"product_ricci", frame_max(prod)},
          {"product_tension", bten}};
}

double base_side_defect(const Residuals& r) {
  double v = 0.0;
  for (const char* k : {"base_system", "base_tension", "fiber_einstein", "fiber_scalar", "constraint"})
    v = std::max(v, find_residual(r, k));
  return v;
}

double product_side_defect(const Residuals& r) {
  return std::max(find_residual(r, "product_ricci"), find_residual(r, "product_tension"));
}

Residuals phi_static_check(const MetricField& g, const MapField& phi, double alpha, const ScalarField& f,
                           double lambda, const std::vector<double>& p) {
  const int m = g.dim;
  if (m < 2) throw WarpedError("phi-static check needs m >= 2");
  PhiBundle b = compute_phi(g, phi, alpha, p, 2, {false, false});
  Frame F = orthonormal_frame(values(b.geo.g()));
  Jet fj = f.eval(coord_jets(p, 2));
  Deriv df = frame_derivs(fj, b.geo, F);
  Deriv du = frame_derivs(exp(-fj), b.geo, F);
  DTensor ric = frame_components(values(b.ric_phi), F);
  const double c = lambda / (m + 1);

  DTensor sys(m, 2, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) sys(i, j) = ric(i, j) + df.H(i, j) - df.d[i] * df.d[j] - (i == j ? c * F.eta[i] : 0.0);

  const auto pf = push_gradient(b, F, df.d);
  double ten = 0.0;
  for (int a = 0; a < b.map.n; ++a) ten = std::max(ten, std::abs(b.map.tau[a][0].value() - pf[a]));

  const double u = std::exp(-fj.value());
  return {{"system", max_abs(sys)},
          {"tension", ten},
          {"laplacian", std::abs(df.lap - df.grad2 - c)},
          {"eigen", std::abs(-du.lap - c * u)},
          {"scalar", std::abs(b.s_phi.value() - (m - 1) * lambda / (m + 1))}};
}

}  // namespace phg
