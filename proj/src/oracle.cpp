#include "phg/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace phg::oracle {

namespace {

// stencil weights for the k-th central difference with unit step, offsets −2..2
const double kStencil[4][5] = {
    {0, 0, 1, 0, 0},
    {0, -0.5, 0, 0.5, 0},
    {0, 1, -2, 1, 0},
    {-0.5, 1, 0, -1, 0.5},
};

double central(const ScalarFn& f, std::vector<double> p, const MultiIndex& g, int var, double h) {
  const int m = static_cast<int>(p.size());
  while (var < m && g.e[var] == 0) ++var;
  if (var == m) return f(p);
  const int k = g.e[var];
  double s = 0.0;
  const double x0 = p[var];
  for (int o = -2; o <= 2; ++o) {
    double w = kStencil[k][o + 2];
    if (w == 0.0) continue;
    p[var] = x0 + o * h;
    s += w * central(f, p, g, var + 1, h);
  }
  return s / std::pow(h, k);
}

}  // namespace

FdResult fd_partial(const ScalarFn& f, const std::vector<double>& p, const MultiIndex& gamma, double h) {
  if (gamma.degree() > 3) throw std::invalid_argument("finite differences are limited to order 3");
  for (std::size_t i = p.size(); i < gamma.e.size(); ++i)
    if (gamma.e[i]) throw std::invalid_argument("multi-index exceeds the point dimension");
  if (gamma.degree() == 0) return {f(p), 0.0};
  double d[3];
  for (int l = 0; l < 3; ++l) d[l] = central(f, p, gamma, 0, h / (1 << l));
  double r10 = (4 * d[1] - d[0]) / 3, r11 = (4 * d[2] - d[1]) / 3;
  double r2 = (16 * r11 - r10) / 15;
  FdResult r{r2, std::abs(r2 - r11)};
  if (!std::isfinite(r.value)) throw std::runtime_error("non-convergent finite-difference sequence");
  return r;
}

DTensor constant_curvature_riemann(const DTensor& g, double K) {
  const int m = g.dim();
  DTensor R(m, 4, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) R(a, b, c, d) = K * (g(a, c) * g(b, d) - g(a, d) * g(b, c));
  return R;
}

Classical classical_curvatures(const MetricField& gf, const std::vector<double>& p, int depth) {
  const int K = depth;
  MetricJets mj = metric_at(gf, p, K);
  const int m = mj.m;
  const JTensor& g = mj.g;
  const JTensor& gi = mj.ginv;
  // first kind: Γ_{ρνσ} = ½(∂_ν g_ρσ + ∂_σ g_ρν − ∂_ρ g_νσ)
  JTensor G1(m, 3), G2(m, 3);
  for (int r = 0; r < m; ++r)
    for (int n = 0; n < m; ++n)
      for (int s = 0; s < m; ++s)
        G1(r, n, s) = 0.5 * (g(r, s).derivative(n) + g(r, n).derivative(s) - g(n, s).derivative(r));
  for (int l = 0; l < m; ++l)
    for (int n = 0; n < m; ++n)
      for (int s = 0; s < m; ++s) {
        Jet v(m, K - 1, 0.0);
        for (int r = 0; r < m; ++r) v.add_product(gi(l, r), G1(r, n, s));
        G2(l, n, s) = v;
      }
  // R_{ρσμν} = ∂_μΓ_{ρνσ} − ∂_νΓ_{ρμσ} − Γ_{λμρ}Γ^λ_{νσ} + Γ_{λνρ}Γ^λ_{μσ}
  JTensor R(m, 4);
  for (int r = 0; r < m; ++r)
    for (int s = 0; s < m; ++s)
      for (int mu = 0; mu < m; ++mu)
        for (int nu = 0; nu < m; ++nu) {
          Jet v = G1(r, nu, s).derivative(mu) - G1(r, mu, s).derivative(nu);
          for (int l = 0; l < m; ++l) {
            v.add_product(G1(l, mu, r), G2(l, nu, s), -1.0);
            v.add_product(G1(l, nu, r), G2(l, mu, s));
          }
          R(r, s, mu, nu) = v;
        }
  JTensor ric(m, 2);
  for (int s = 0; s < m; ++s)
    for (int n = 0; n < m; ++n) {
      Jet v(m, K - 2, 0.0);
      for (int r = 0; r < m; ++r)
        for (int mu = 0; mu < m; ++mu) v.add_product(gi(r, mu), R(r, s, mu, n));
      ric(s, n) = v;
    }
  Jet S = trace2(ric, gi);
  Classical out;
  out.riem = values(R);
  out.ric = values(ric);
  out.scalar = S.value();
  if (m < 3) return out;
  JTensor A(m, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) A(i, j) = ric(i, j) - S * g(i, j) * (1.0 / (2.0 * (m - 1)));
  JTensor kn = kulkarni_nomizu(A, g);
  JTensor W(m, 4);
  for (std::size_t f = 0; f < W.size(); ++f) W[f] = R[f] - kn[f] * (1.0 / (m - 2));
  out.schouten = values(A);
  out.weyl = values(W);
  if (depth < 3) return out;
  JTensor gamma(m, 3);
  gamma.set_upper({true, false, false});
  for (std::size_t f = 0; f < gamma.size(); ++f) gamma[f] = G2[f];
  JTensor dA = covariant_derivative(A, gamma);
  JTensor C(m, 3);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) C(i, j, k) = dA(i, j, k) - dA(i, k, j);
  out.cotton = values(C);
  if (depth < 4) return out;
  JTensor dC = covariant_derivative(C, gamma);
  JTensor ricu(m, 2);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Jet v(m, 0, 0.0);
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) v += gi(a, c).truncated(0) * gi(b, d).truncated(0) * ric(c, d).truncated(0);
      ricu(a, b) = v;
    }
  DTensor B(m, 2, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double v = 0;
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) {
          v += gi(k, t).value() * dC(i, j, k, t).value();
          v += ricu(t, k).value() * W(t, i, k, j).value();
        }
      B(i, j) = v / (m - 2);
    }
  out.bach = B;
  return out;
}

}  // namespace phg::oracle

namespace phg::oracle {

Expr random_expression(std::mt19937_64& rng, int m, int depth) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_int_distribution<int> var(0, m - 1);
  if (depth <= 0) {
    if (pick(rng) < 3) return Expr(std::round(u(rng) * 100) / 50);
    return Expr::x(var(rng)) * Expr(0.5 + 0.5 * std::abs(u(rng)));
  }
  Expr a = random_expression(rng, m, depth - 1);
  switch (pick(rng)) {
    case 0: return a + random_expression(rng, m, depth - 1);
    case 1: return a - random_expression(rng, m, depth - 1);
    case 2: return a * random_expression(rng, m, depth - 1);
    case 3: return a / (Expr(2.0) + sin(random_expression(rng, m, depth - 1)));
    case 4: return exp(sin(a));
    case 5: return log(Expr(2.0) + cos(a));
    case 6: return sqrt(Expr(1.5) + sin(a));
    case 7: return sin(a);
    case 8: return cos(a);
    default: return pow(Expr(1.2) + sin(a), Expr(u(rng) > 0 ? 3.0 : 1.5));
  }
}

double jet_vs_fd(const Expr& e, const std::vector<double>& p, int order) {
  const int m = static_cast<int>(p.size());
  std::vector<Jet> xs;
  for (int i = 0; i < m; ++i) xs.push_back(Jet::variable(i, p[i], m, order));
  Jet j = e.eval(xs);
  ScalarFn f = [&](const std::vector<double>& q) { return e.eval(q); };
  const JetTable& tab = JetTable::get(m);
  double worst = 0.0;
  for (int i = 1; i < tab.size[order]; ++i) {
    const MultiIndex& g = tab.index[i];
    double exact = j.extract(g);
    // step scan: keep the extrapolation with the smallest error estimate
    FdResult fd = fd_partial(f, p, g, 2e-2);
    for (double h : {1e-2, 5e-3, 2.5e-3}) {
      FdResult t = fd_partial(f, p, g, h);
      if (t.error < fd.error) fd = t;
    }
    double rel = std::abs(exact - fd.value) / std::max({std::abs(exact), std::abs(fd.value), 1.0});
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace phg::oracle
