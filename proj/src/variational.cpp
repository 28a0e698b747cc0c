#include "phg/variational.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "phg/conformal.hpp"
#include "phg/parallel.hpp"

namespace phg {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

double yamabe_c(int m) { return 4.0 * (m - 1) / (m - 2); }

std::vector<Jet> point_jets(const std::function<std::vector<Jet>(const CoordJets&)>& f, const std::vector<double>& p,
                            int K) {
  return f(coord_jets(p, K));
}

JTensor as_tensor2(const std::vector<Jet>& c, int m) {
  JTensor t(m, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) t(i, j) = c[i * m + j];
  return t;
}

Section as_section(const std::vector<Jet>& c) {
  Section s;
  for (const auto& j : c) {
    JTensor t(j.vars(), 0);
    t[0] = j;
    s.push_back(std::move(t));
  }
  return s;
}

// g^{ik} g^{jl} A_ij B_kl on values
double pair2(const DTensor& A, const DTensor& B, const DTensor& gi) {
  const int m = A.dim();
  double s = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) s += gi(i, k) * gi(j, l) * A(i, j) * B(k, l);
  return s;
}

double tdot(const DTensor& eta, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) s += eta(i, j) * a[i] * b[j];
  return s;
}

std::vector<double> section_values(const Section& s) {
  std::vector<double> v(s.size());
  for (std::size_t a = 0; a < s.size(); ++a) v[a] = s[a][0].value();
  return v;
}

// per-node sums in node order, so the result does not depend on the worker count
std::vector<double> grid_sums(const QuadratureGrid& grid, int threads, int width,
                              const std::function<void(const std::vector<double>&, double*)>& f) {
  const std::size_t n = grid.size();
  std::vector<double> buf(n * width, 0.0);
  parallel_for(n, threads, [&](std::size_t i) { f(grid.node(i), &buf[i * width]); });
  std::vector<double> out(width, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < width; ++k) out[k] += buf[i * width + k];
  for (auto& v : out) v *= grid.weight;
  return out;
}

void require_closed(const ClosedSetup& s) {
  if (!s.chart.fully_periodic()) throw VariationalError("functionals need a fully periodic chart");
}

// Hess u and Δu from a scalar field at the bundle's point
struct ScalarDerivs {
  double u = 0, lap = 0;
  std::vector<double> grad;
  DTensor hess;
};

ScalarDerivs scalar_derivs(const ScalarField& u, const Geometry& geo, const std::vector<double>& p) {
  const int m = geo.m;
  Jet uj = u.eval(coord_jets(p, geo.K));
  JTensor du = covariant_derivative(uj, m);
  JTensor H = covariant_derivative(du, geo.gamma);
  ScalarDerivs d;
  d.u = uj.value();
  d.grad.resize(m);
  for (int i = 0; i < m; ++i) d.grad[i] = du(i).value();
  d.hess = values(H);
  DTensor gi = values(geo.ginv());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) d.lap += gi(i, j) * d.hess(i, j);
  return d;
}

AdjointValue adjoint_from(const PhiBundle& b, const ScalarDerivs& d) {
  const int m = b.m, n = b.map.n;
  DTensor g = values(b.geo.g()), gi = values(b.geo.ginv()), ric = values(b.ric_phi);
  AdjointValue a{DTensor(m, 2, 0.0), std::vector<double>(n, 0.0)};
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a.first(i, j) = d.hess(i, j) - d.u * ric(i, j) - d.lap * g(i, j);
  std::vector<double> tau = section_values(b.map.tau);
  for (int c = 0; c < n; ++c) {
    double push = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) push += gi(i, j) * b.map.dphi[c](i).value() * d.grad[j];
    a.second[c] = 2.0 * b.alpha * (d.u * tau[c] + push);
  }
  return a;
}

double linearized_from(const PhiBundle& b, const MetricField& h, const VectorField& v, const std::vector<double>& p) {
  const int m = b.m;
  const Geometry& geo = b.geo;
  JTensor hJ = as_tensor2(point_jets(h.eval, p, geo.K), m);
  JTensor ddh = covariant_derivative(covariant_derivative(hJ, geo.gamma), geo.gamma);  // ∇_l ∇_k h_ij at (i,j,k,l)
  Jet trh = trace2(hJ, geo.ginv());
  JTensor ddtr = covariant_derivative(covariant_derivative(trh, m), geo.gamma);
  DTensor gi = values(geo.ginv());
  double lap_tr = 0, divdiv = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      lap_tr += gi(i, j) * ddtr(i, j).value();
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) divdiv += gi(i, k) * gi(j, l) * ddh(i, j, k, l).value();
    }
  double hr = pair2(values(hJ), values(b.ric_phi), gi);
  Section vs = as_section(point_jets(v.eval, p, geo.K));
  Section dv = pullback_derivative(vs, geo, b.map);
  double mix = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) mix += gi(i, j) * target_dot(b.map, b.map.dphi, i, dv, j).value();
  return -lap_tr + divdiv - hr - 2.0 * b.alpha * mix;
}

// Basis of products of 1, cos kθ, sin kθ per axis: values and x-derivatives.
struct TrigBasis {
  int m = 0, per_axis = 0, count = 0;
  std::vector<double> scale;  // 2π / period

  TrigBasis(const QuadratureGrid& grid, int kmax) : m(grid.dim), per_axis(2 * kmax + 1) {
    count = 1;
    for (int i = 0; i < m; ++i) count *= per_axis;
    for (int i = 0; i < m; ++i) scale.push_back(kTwoPi / (grid.step[i] * grid.N));
  }
  // f_j(θ) with j = 0 → 1, odd → cos, even → sin
  static void axis(int j, double th, double& f, double& df) {
    if (j == 0) {
      f = 1.0, df = 0.0;
      return;
    }
    const int k = (j + 1) / 2;
    if (j % 2) f = std::cos(k * th), df = -k * std::sin(k * th);
    else f = std::sin(k * th), df = k * std::cos(k * th);
  }
  void eval(const std::vector<double>& x, const std::vector<double>& lo, double* val, double* grad) const {
    std::vector<double> f(m * per_axis), df(m * per_axis);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < per_axis; ++j) axis(j, scale[i] * (x[i] - lo[i]), f[i * per_axis + j], df[i * per_axis + j]);
    for (int b = 0; b < count; ++b) {
      int r = b;
      std::vector<int> idx(m);
      for (int i = 0; i < m; ++i) idx[i] = r % per_axis, r /= per_axis;
      double v = 1.0;
      for (int i = 0; i < m; ++i) v *= f[i * per_axis + idx[i]];
      val[b] = v;
      for (int d = 0; d < m; ++d) {
        double gd = scale[d] * df[d * per_axis + idx[d]];
        for (int i = 0; i < m; ++i)
          if (i != d) gd *= f[i * per_axis + idx[i]];
        grad[d * count + b] = gd;
      }
    }
  }
};

}  // namespace

// ---- quadrature

std::size_t QuadratureGrid::size() const {
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(N);
  return n;
}

std::vector<double> QuadratureGrid::node(std::size_t i) const {
  std::vector<double> x(dim);
  for (int k = 0; k < dim; ++k) {
    x[k] = lo[k] + step[k] * static_cast<double>(i % N);
    i /= N;
  }
  return x;
}

QuadratureGrid make_grid(const Chart& chart, int N) {
  if (N < 1) throw VariationalError("grid needs at least one node per axis");
  if (!chart.fully_periodic()) throw VariationalError("quadrature grid needs a fully periodic chart");
  QuadratureGrid g;
  g.dim = chart.dim;
  g.N = N;
  g.lo = chart.lo;
  g.weight = 1.0;
  for (int i = 0; i < chart.dim; ++i) {
    g.step.push_back(chart.period(i) / N);
    g.weight *= g.step.back();
  }
  return g;
}

double integrate(const ClosedSetup& s, const std::function<double(const std::vector<double>&)>& density) {
  require_closed(s);
  return grid_sums(s.grid, s.threads, 1, [&](const std::vector<double>& x, double* out) {
    out[0] = density(x) * metric_at(s.g, x, 0).vol.value();
  })[0];
}

double integrate_dx(const QuadratureGrid& grid, int threads, const std::function<double(const std::vector<double>&)>& f) {
  return grid_sums(grid, threads, 1, [&](const std::vector<double>& x, double* out) { out[0] = f(x); })[0];
}

// ---- functionals

double s2_eigenvalues(const DTensor& A, const DTensor& g) {
  Eigen::MatrixXd M = to_matrix(g).inverse() * to_matrix(A);
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  const auto ev = es.eigenvalues();
  std::complex<double> s = 0;
  for (int i = 0; i < ev.size(); ++i)
    for (int j = i + 1; j < ev.size(); ++j) s += ev[i] * ev[j];
  return s.real();
}

FunctionalValues functionals(const MetricField& g, const MapField& phi, double alpha, const QuadratureGrid& grid,
                             int threads) {
  const int m = g.dim;
  if (m < 3) throw VariationalError("rescaled functionals need m >= 3");
  enum { VOL, S, SC, E, E2, S2, B, BA, W };
  auto sums = grid_sums(grid, threads, W, [&](const std::vector<double>& x, double* out) {
    PhiBundle b = compute_phi(g, phi, alpha, x, 2, PhiOptions{false, false});
    DTensor gv = values(b.geo.g()), gi = values(b.geo.ginv()), ric = values(b.ric_phi);
    DTensor eta = values(b.map.target.eta);
    std::vector<double> tau = section_values(b.map.tau);
    const double vol = b.geo.metric.vol.value();
    const double sp = b.s_phi.value();
    const double e2 = 0.5 * tdot(eta, tau, tau);
    DTensor A(m, 2, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) A(i, j) = ric(i, j) - sp / (2.0 * (m - 1)) * gv(i, j);
    const double s2 = s2_eigenvalues(A, gv);
    out[VOL] = vol;
    out[S] = sp * vol;
    out[SC] = b.geo.scalar.value() * vol;
    out[E] = b.map.energy.value() * vol;
    out[E2] = e2 * vol;
    out[S2] = s2 * vol;
    out[B] = (s2 - alpha * e2) * vol;
    out[BA] = (m / (8.0 * (m - 1)) * sp * sp - 0.5 * pair2(ric, ric, gi) - alpha * e2) * vol;
  });
  FunctionalValues f;
  f.vol = sums[VOL];
  f.S = sums[S];
  f.S_classical = sums[SC];
  f.S_bar = std::pow(f.vol, -(m - 2.0) / m) * f.S;
  f.E = sums[E];
  f.E2 = sums[E2];
  f.S2 = sums[S2];
  f.B = sums[B];
  f.B_alt = sums[BA];
  return f;
}

// ---- directions

VectorField VectorField::from_exprs(std::vector<Expr> comps) {
  VectorField v;
  v.n = static_cast<int>(comps.size());
  v.eval = [comps](const CoordJets& x) {
    std::vector<Jet> out;
    for (const auto& e : comps) out.push_back(e.eval(x));
    return out;
  };
  return v;
}

MetricField perturb_metric(const MetricField& g, const MetricField& h, double t) {
  if (g.dim != h.dim) throw VariationalError("metric direction has the wrong dimension");
  MetricField out;
  out.dim = g.dim;
  auto ge = g.eval;
  auto he = h.eval;
  out.eval = [ge, he, t](const CoordJets& x) {
    std::vector<Jet> a = ge(x), b = he(x);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i] * t;
    return a;
  };
  return out;
}

MapField perturb_map(const MapField& phi, const VectorField& v, double t) {
  const int n = phi.target->dim();
  if (v.n != n) throw VariationalError("map direction has the wrong target dimension");
  MapField out = phi;
  auto pe = phi.eval;
  auto ve = v.eval;
  if (phi.target->kind() != TargetKind::round_sphere) {
    out.eval = [pe, ve, t](const CoordJets& x) {
      std::vector<Jet> a = pe(x), b = ve(x);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i] * t;
      return a;
    };
    return out;
  }
  // Great circle through the embedding X = (2y, |y|² − 1)/(1 + |y|²) in ℝ^{n+1}.
  out.eval = [pe, ve, t, n](const CoordJets& x) {
    std::vector<Jet> y = pe(x), w = ve(x);
    Jet r2 = y[0] * y[0], yw = y[0] * w[0];
    for (int a = 1; a < n; ++a) r2 += y[a] * y[a], yw += y[a] * w[a];
    Jet s = r2 + 1.0;
    Jet is = reciprocal(s);
    std::vector<Jet> X, V;
    for (int a = 0; a < n; ++a) {
      X.push_back(y[a] * 2.0 * is);
      V.push_back(w[a] * 2.0 * is - y[a] * yw * 4.0 * is * is);
    }
    X.push_back((r2 - 1.0) * is);
    V.push_back(yw * 4.0 * is * is);
    Jet q = V[0] * V[0];
    for (int a = 1; a <= n; ++a) q += V[a] * V[a];
    // cos(t√q) and sin(t√q)/√q as series in z = t²q
    Jet z = q * (t * t);
    Jet c(z.vars(), z.order(), 0.0), sn(z.vars(), z.order(), 0.0), zp(z.vars(), z.order(), 1.0);
    double fc = 1.0, fs = 1.0;  // 1/(2k)!, 1/(2k+1)!
    for (int k = 0; k < 12; ++k) {
      const double sg = (k % 2) ? -1.0 : 1.0;
      c += zp * (sg * fc);
      sn += zp * (sg * fs * t);
      zp = zp * z;
      fc /= (2.0 * k + 1) * (2.0 * k + 2);
      fs /= (2.0 * k + 2) * (2.0 * k + 3);
    }
    std::vector<Jet> Xt;
    for (int a = 0; a <= n; ++a) Xt.push_back(c * X[a] + sn * V[a]);
    Jet den = reciprocal(1.0 - Xt[n]);
    std::vector<Jet> out_y;
    for (int a = 0; a < n; ++a) out_y.push_back(Xt[a] * den);
    return out_y;
  };
  return out;
}

Expr random_periodic(std::mt19937_64& rng, const Chart& chart, double amp, int kmax, int terms) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0), phase(0.0, kTwoPi);
  std::uniform_int_distribution<int> wave(-kmax, kmax);
  Expr sum(0.0);
  for (int t = 0; t < terms; ++t) {
    Expr arg(phase(rng));
    for (int i = 0; i < chart.dim; ++i) {
      const int k = wave(rng);
      if (k != 0) arg = arg + Expr(k * kTwoPi / chart.period(i)) * (Expr::x(i) - Expr(chart.lo[i]));
    }
    sum = sum + Expr(amp * coef(rng)) * sin(arg);
  }
  return sum;
}

MetricField random_metric_direction(std::mt19937_64& rng, const Chart& chart, double amp, int kmax) {
  const int m = chart.dim;
  std::vector<Expr> c(m * m, Expr(0.0));
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) c[i * m + j] = c[j * m + i] = random_periodic(rng, chart, amp, kmax);
  return MetricField::from_exprs(m, c);
}

VectorField random_map_direction(std::mt19937_64& rng, const Chart& chart, int n, double amp, int kmax) {
  std::vector<Expr> c;
  for (int a = 0; a < n; ++a) c.push_back(random_periodic(rng, chart, amp, kmax));
  return VectorField::from_exprs(c);
}

// ---- finite differences

std::vector<FdDerivative> fd_directional_many(const std::function<std::vector<double>(double)>& F,
                                              const std::vector<double>& steps) {
  if (steps.size() < 2) throw VariationalError("finite differences need at least two steps");
  for (std::size_t k = 1; k < steps.size(); ++k)
    if (!(steps[k] < steps[k - 1] && steps[k] > 0)) throw VariationalError("steps must be positive and decreasing");
  std::vector<std::vector<double>> D;  // D[k][f]
  std::vector<double> noise;           // rounding level of the smallest-step difference
  for (double h : steps) {
    auto a = F(h), b = F(-h);
    std::vector<double> d(a.size());
    noise.assign(a.size(), 0.0);
    for (std::size_t f = 0; f < a.size(); ++f) {
      d[f] = (a[f] - b[f]) / (2.0 * h);
      noise[f] = 1e-14 * std::max(std::abs(a[f]), std::abs(b[f])) / h;
    }
    D.push_back(std::move(d));
  }
  const std::size_t nf = D[0].size(), ns = steps.size();
  std::vector<FdDerivative> out(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    // Neville in x = h², evaluated at x = 0
    std::vector<double> P(ns), prev;
    for (std::size_t k = 0; k < ns; ++k) P[k] = D[k][f];
    out[f].central = P;
    for (std::size_t lev = 1; lev < ns; ++lev) {
      prev = P;
      for (std::size_t k = 0; k + lev < ns; ++k) {
        const double xa = steps[k] * steps[k], xb = steps[k + lev] * steps[k + lev];
        P[k] = (xa * prev[k + 1] - xb * prev[k]) / (xa - xb);
      }
    }
    out[f].value = P[0];
    out[f].error = ns > 2 ? std::abs(P[0] - prev[1]) : std::abs(P[0] - D[ns - 1][f]);
    const double floor = 1e-13 * std::abs(P[0]) + noise[f];
    for (std::size_t k = 2; k < ns; ++k)
      if (std::abs(D[k][f] - D[k - 1][f]) > std::abs(D[k - 1][f] - D[k - 2][f]) + floor) out[f].monotone = false;
  }
  return out;
}

FdDerivative fd_directional(const std::function<double(double)>& F, const std::vector<double>& steps) {
  return fd_directional_many([&](double t) { return std::vector<double>{F(t)}; }, steps)[0];
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), kRelFloor});
}

// ---- variations

std::vector<FunctionalReport> variation_suite(const ClosedSetup& s, const MetricField& h, const VectorField& v,
                                              bool with_bach) {
  require_closed(s);
  const int m = s.g.dim;
  const bool bach = with_bach && m == 4;

  auto fm = fd_directional_many([&](double t) {
    auto f = functionals(perturb_metric(s.g, h, t), s.phi, s.alpha, s.grid, s.threads);
    return std::vector<double>{f.vol, f.S, f.S_bar, f.E, f.E2, f.B};
  });
  auto fv = fd_directional_many([&](double t) {
    auto f = functionals(s.g, perturb_map(s.phi, v, t), s.alpha, s.grid, s.threads);
    return std::vector<double>{f.S, f.S_bar, f.E, f.E2, f.B};
  });

  enum { VOL, TR, HSR, HT, HT2, HB, TV, T2V, JV, SP, W };
  auto I = grid_sums(s.grid, s.threads, W, [&](const std::vector<double>& x, double* out) {
    PhiBundle b = compute_phi(s.g, s.phi, s.alpha, x, 4, PhiOptions{false, false});
    DTensor gv = values(b.geo.g()), gi = values(b.geo.ginv()), ric = values(b.ric_phi);
    DTensor hv = values(as_tensor2(point_jets(h.eval, x, 1), m));
    std::vector<Jet> vj = point_jets(v.eval, x, 1);
    std::vector<double> vv(vj.size());
    for (std::size_t a = 0; a < vj.size(); ++a) vv[a] = vj[a].value();
    DTensor eta = values(b.map.target.eta);
    const double vol = b.geo.metric.vol.value(), sp = b.s_phi.value();
    DTensor G(m, 2, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) G(i, j) = 0.5 * sp * gv(i, j) - ric(i, j);
    out[VOL] = vol;
    out[SP] = sp * vol;
    double tr = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) tr += gi(i, j) * hv(i, j);
    out[TR] = tr * vol;
    out[HSR] = pair2(hv, G, gi) * vol;
    out[HT] = pair2(hv, values(b.stress), gi) * vol;
    out[HT2] = pair2(hv, values(stress_energy_2(b.geo, b.map)), gi) * vol;
    out[TV] = tdot(eta, section_values(b.map.tau), vv) * vol;
    out[T2V] = tdot(eta, section_values(b.map.tau2), vv) * vol;
    if (bach) {
      out[HB] = pair2(hv, values(b.bach), gi) * vol;
      out[JV] = tdot(eta, section_values(b.J), vv) * vol;
    }
  });

  const double V = I[VOL], Sv = I[SP];
  const double vs = std::pow(V, -(m - 2.0) / m);
  auto report = [&](const std::string& name, const FdDerivative& d, double pairing, double tol) {
    FunctionalReport r;
    r.name = name;
    r.fd = d.value;
    r.fd_error = d.error;
    r.monotone = d.monotone;
    r.pairing = pairing;
    r.rel_error = relative_error(d.value, pairing);
    r.tol = tol;
    r.pass = r.rel_error <= tol || (std::abs(d.value) <= kBothSmall && std::abs(pairing) <= kBothSmall);
    return r;
  };
  std::vector<FunctionalReport> out;
  out.push_back(report("vol/metric", fm[0], 0.5 * I[TR], 1e-5));
  out.push_back(report("S/metric", fm[1], I[HSR], 1e-5));
  out.push_back(report("S_bar/metric", fm[2], vs * (I[HSR] - (m - 2.0) / (2.0 * m) * (Sv / V) * I[TR]), 1e-5));
  out.push_back(report("E/metric", fm[3], -0.5 * I[HT], 1e-5));
  out.push_back(report("E2/metric", fm[4], 0.5 * I[HT2], 1e-5));
  if (bach) out.push_back(report("B/metric", fm[5], I[HB], 1e-4));
  out.push_back(report("S/map", fv[0], 2.0 * s.alpha * I[TV], 1e-5));
  out.push_back(report("S_bar/map", fv[1], vs * 2.0 * s.alpha * I[TV], 1e-5));
  out.push_back(report("E/map", fv[2], -I[TV], 1e-5));
  out.push_back(report("E2/map", fv[3], I[T2V], 1e-5));
  if (bach) out.push_back(report("B/map", fv[4], s.alpha * I[JV], 1e-4));
  return out;
}

double linearized_phi_scalar(const MetricField& g, const MapField& phi, double alpha, const MetricField& h,
                             const VectorField& v, const std::vector<double>& p) {
  PhiBundle b = compute_phi(g, phi, alpha, p, 3, PhiOptions{false, false});
  return linearized_from(b, h, v, p);
}

AdjointValue scalar_map_adjoint(const MetricField& g, const MapField& phi, double alpha, const ScalarField& u,
                                const std::vector<double>& p) {
  PhiBundle b = compute_phi(g, phi, alpha, p, 3, PhiOptions{false, false});
  return adjoint_from(b, scalar_derivs(u, b.geo, p));
}

DualityResult adjoint_duality(const ClosedSetup& s, const ScalarField& u, const MetricField& h, const VectorField& v) {
  require_closed(s);
  const int m = s.g.dim;
  auto I = grid_sums(s.grid, s.threads, 2, [&](const std::vector<double>& x, double* out) {
    PhiBundle b = compute_phi(s.g, s.phi, s.alpha, x, 3, PhiOptions{false, false});
    ScalarDerivs d = scalar_derivs(u, b.geo, x);
    AdjointValue a = adjoint_from(b, d);
    const double vol = b.geo.metric.vol.value();
    DTensor hv = values(as_tensor2(point_jets(h.eval, x, 1), m));
    std::vector<Jet> vj = point_jets(v.eval, x, 1);
    std::vector<double> vv(vj.size());
    for (std::size_t k = 0; k < vj.size(); ++k) vv[k] = vj[k].value();
    out[0] = d.u * linearized_from(b, h, v, x) * vol;
    out[1] = (pair2(a.first, hv, values(b.geo.ginv())) + tdot(values(b.map.target.eta), a.second, vv)) * vol;
  });
  return {I[0], I[1], relative_error(I[0], I[1])};
}

Residuals kernel_system_residual(const MetricField& g, const MapField& phi, double alpha, const ScalarField& u,
                                 const std::vector<double>& p) {
  PhiBundle b = compute_phi(g, phi, alpha, p, 3, PhiOptions{false, false});
  AdjointValue a = adjoint_from(b, scalar_derivs(u, b.geo, p));
  double mapr = 0;
  for (double c : a.second) mapr = std::max(mapr, std::abs(c));
  if (alpha != 0.0) mapr /= std::abs(2.0 * alpha);
  return {{"metric", max_abs(frame_components(a.first, orthonormal_frame(values(b.geo.g()))))}, {"map", mapr}};
}

// ---- conformal Laplacian and Yamabe

double conformal_laplacian(const MetricField& g, const MapField& phi, double alpha, const ScalarField& u,
                           const std::vector<double>& p) {
  const int m = g.dim;
  if (m < 3) throw VariationalError("conformal Laplacian needs m >= 3");
  PhiBundle b = compute_phi(g, phi, alpha, p, 2, PhiOptions{false, false});
  ScalarDerivs d = scalar_derivs(u, b.geo, p);
  return -yamabe_c(m) * d.lap + b.s_phi.value() * d.u;
}

Lambda1 lambda1(const ClosedSetup& s, int kmax, double shift) {
  require_closed(s);
  const int m = s.g.dim;
  if (m < 3) throw VariationalError("conformal Laplacian needs m >= 3");
  if (kmax < 0 || s.grid.N <= 2 * kmax) throw VariationalError("grid too coarse for the trial space");
  TrigBasis basis(s.grid, kmax);
  const int nb = basis.count;
  const std::size_t nodes = s.grid.size();
  Eigen::MatrixXd Phi(nodes, nb);
  std::vector<Eigen::MatrixXd> Grad(m, Eigen::MatrixXd(nodes, nb));
  std::vector<double> vol(nodes), sp(nodes), gi(nodes * m * m);
  parallel_for(nodes, s.threads, [&](std::size_t i) {
    auto x = s.grid.node(i);
    PhiBundle b = compute_phi(s.g, s.phi, s.alpha, x, 2, PhiOptions{false, false});
    vol[i] = b.geo.metric.vol.value();
    sp[i] = b.s_phi.value();
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < m; ++c) gi[(i * m + a) * m + c] = b.geo.ginv()(a, c).value();
    std::vector<double> val(nb), grad(m * nb);
    basis.eval(x, s.grid.lo, val.data(), grad.data());
    for (int k = 0; k < nb; ++k) {
      Phi(i, k) = val[k];
      for (int d = 0; d < m; ++d) Grad[d](i, k) = grad[d * nb + k];
    }
  });
  const double c = yamabe_c(m), w = s.grid.weight;
  Eigen::VectorXd mass(nodes), pot(nodes);
  for (std::size_t i = 0; i < nodes; ++i) mass[i] = w * vol[i], pot[i] = w * vol[i] * (sp[i] + shift);
  Eigen::MatrixXd Bm = Phi.transpose() * mass.asDiagonal() * Phi;
  Eigen::MatrixXd A = Phi.transpose() * pot.asDiagonal() * Phi;
  for (int a = 0; a < m; ++a)
    for (int d = 0; d < m; ++d) {
      Eigen::VectorXd k(nodes);
      for (std::size_t i = 0; i < nodes; ++i) k[i] = c * w * vol[i] * gi[(i * m + a) * m + d];
      A += Grad[a].transpose() * k.asDiagonal() * Grad[d];
    }
  A = 0.5 * (A + A.transpose());
  Bm = 0.5 * (Bm + Bm.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Bm);
  if (es.info() != Eigen::Success) throw VariationalError("Rayleigh minimisation did not converge");
  Lambda1 r;
  r.value = es.eigenvalues()[0];
  r.basis = nb;
  r.inf_s = *std::min_element(sp.begin(), sp.end()) + shift;
  return r;
}

MetricField yamabe_metric(const MetricField& g, const ScalarField& u) {
  const int m = g.dim;
  if (m < 3) throw VariationalError("Yamabe rescaling needs m >= 3");
  MetricField out;
  out.dim = m;
  auto ge = g.eval;
  auto ue = u.eval;
  const double p = 4.0 / (m - 2);
  out.eval = [ge, ue, p](const CoordJets& x) {
    std::vector<Jet> c = ge(x);
    Jet w = pow(ue(x), p);
    for (auto& j : c) j = j * w;
    return c;
  };
  return out;
}

double yamabe_equation_residual(const MetricField& g, const MapField& phi, double alpha, const ScalarField& u,
                                const std::vector<double>& p) {
  const int m = g.dim;
  PhiBundle b = compute_phi(g, phi, alpha, p, 2, PhiOptions{false, false});
  ScalarDerivs d = scalar_derivs(u, b.geo, p);
  const double st = compute_phi(yamabe_metric(g, u), phi, alpha, p, 2, PhiOptions{false, false}).s_phi.value();
  return yamabe_c(m) * d.lap - b.s_phi.value() * d.u + st * std::pow(d.u, (m + 2.0) / (m - 2.0));
}

YamabeReport yamabe_bound_check(const ClosedSetup& s, int trials, std::uint64_t seed,
                                const std::vector<std::vector<double>>& samples) {
  require_closed(s);
  const int m = s.g.dim;
  YamabeReport r;
  Lambda1 l = lambda1(s);
  r.lambda1 = l.value;
  r.inf_s = l.inf_s;
  r.trials = trials;
  // 𝒮̄ is scale invariant while λ₁ scales like a curvature, so the bound
  // carries vol(g)^{2/m}.
  const double V = functionals(s).vol;
  r.bound = std::min(0.0, l.value) * std::pow(V, 2.0 / m);
  r.tol = 1e-3 * std::max(1.0, std::abs(r.bound));
  r.lambda_ok = r.lambda1 >= r.inf_s - 1e-3 * std::max(1.0, std::abs(r.inf_s));
  std::mt19937_64 rng(seed);
  r.min_sbar = INFINITY;
  for (int t = 0; t < trials; ++t) {
    ScalarField u = ScalarField::from_expr(exp(random_periodic(rng, s.chart, 0.4, 2)));
    r.min_sbar = std::min(r.min_sbar, functionals(yamabe_metric(s.g, u), s.phi, s.alpha, s.grid, s.threads).S_bar);
    if (t < 3)
      for (const auto& p : samples)
        r.equation_residual = std::max(r.equation_residual, std::abs(yamabe_equation_residual(s.g, s.phi, s.alpha, u, p)));
  }
  r.sbar_ok = trials == 0 || r.min_sbar >= r.bound - r.tol;
  r.equation_ok = r.equation_residual <= 1e-7;
  return r;
}

double q_integral(const ClosedSetup& s) {
  require_closed(s);
  if (s.g.dim != 4) throw VariationalError("Q is defined for m = 4");
  return integrate_dx(s.grid, s.threads, [&](const std::vector<double>& x) {
    return q_density(compute_phi(s.g, s.phi, s.alpha, x, 2, PhiOptions{false, false}));
  });
}

DualityResult q_integral_invariance(const ClosedSetup& s, const ScalarField& f) {
  ScalarField h;
  auto fe = f.eval;
  h.eval = [fe](const CoordJets& x) { return fe(x) * 0.5; };
  ClosedSetup t = s;
  t.g = conformal_metric(s.g, h);  // e^{−f} g
  const double a = q_integral(s), b = q_integral(t);
  return {a, b, relative_error(a, b)};
}

}  // namespace phg
