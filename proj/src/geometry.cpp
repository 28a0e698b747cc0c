#include "phg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace phg {

Chart Chart::torus(int m, double period) {
  Chart c;
  c.dim = m;
  c.lo.assign(m, 0.0);
  c.hi.assign(m, period);
  c.periodic.assign(m, true);
  c.n_pos = m;
  return c;
}

Chart Chart::box(int m, double lo, double hi) {
  Chart c;
  c.dim = m;
  c.lo.assign(m, lo);
  c.hi.assign(m, hi);
  c.periodic.assign(m, false);
  c.n_pos = m;
  return c;
}

bool Chart::fully_periodic() const {
  return std::all_of(periodic.begin(), periodic.end(), [](bool b) { return b; });
}

bool Chart::contains(const std::vector<double>& p) const {
  if (static_cast<int>(p.size()) != dim) return false;
  for (int i = 0; i < dim; ++i)
    if (!periodic[i] && (p[i] < lo[i] || p[i] > hi[i])) return false;
  return true;
}

void Chart::validate() const {
  if (dim < 1 || dim > kMaxVars) throw GeometryError("chart dimension out of range");
  if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim ||
      static_cast<int>(periodic.size()) != dim)
    throw GeometryError("chart axis data does not match its dimension");
  for (int i = 0; i < dim; ++i)
    if (!(hi[i] > lo[i])) throw GeometryError("chart axis " + std::to_string(i + 1) + " has an empty interval");
  if (n_pos + n_neg != dim) throw GeometryError("signature entries do not sum to the dimension");
}

CoordJets coord_jets(const std::vector<double>& p, int K) {
  const int m = static_cast<int>(p.size());
  CoordJets x;
  x.reserve(m);
  for (int i = 0; i < m; ++i) x.push_back(Jet::variable(i, p[i], m, K));
  return x;
}

MetricField MetricField::from_exprs(int dim, std::vector<Expr> comps) {
  if (static_cast<int>(comps.size()) != dim * dim) throw GeometryError("metric needs dim*dim components");
  MetricField f;
  f.dim = dim;
  auto shared = std::make_shared<std::vector<Expr>>(std::move(comps));
  f.eval = [shared, dim](const CoordJets& x) {
    std::vector<Jet> out(dim * dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        out[i * dim + j] = (*shared)[i * dim + j].eval(x);
        out[j * dim + i] = out[i * dim + j];
      }
    return out;
  };
  return f;
}

MetricField MetricField::constant(const Eigen::MatrixXd& g) {
  MetricField f;
  f.dim = static_cast<int>(g.rows());
  Eigen::MatrixXd gc = g;
  f.eval = [gc](const CoordJets& x) {
    const int m = static_cast<int>(gc.rows());
    std::vector<Jet> out;
    out.reserve(m * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) out.emplace_back(x[0].vars(), x[0].order(), gc(i, j));
    return out;
  };
  return f;
}

DTensor MetricField::value_at(const std::vector<double>& p) const {
  auto comps = eval(coord_jets(p, 0));
  DTensor t(dim, 2, 0.0);
  for (int i = 0; i < dim * dim; ++i) t[i] = comps[i].value();
  return t;
}

ScalarField ScalarField::from_expr(Expr e) {
  ScalarField s;
  s.eval = [e](const CoordJets& x) { return e.eval(x); };
  return s;
}

double ScalarField::value_at(const std::vector<double>& p) const { return eval(coord_jets(p, 0)).value(); }

// Gauss-Jordan inverse of a jet matrix with partial pivoting on constant terms.
void invert_jet_matrix(const JTensor& a, JTensor& inv, Jet& det) {
  const int m = a.dim();
  std::vector<Jet> A(a.data());
  JTensor I(m, 2, Jet(a[0].vars(), a[0].order(), 0.0));
  for (int i = 0; i < m; ++i) I(i, i) = Jet(a[0].vars(), a[0].order(), 1.0);
  std::vector<Jet>& B = I.data();
  det = Jet(a[0].vars(), a[0].order(), 1.0);
  for (int c = 0; c < m; ++c) {
    int piv = c;
    for (int r = c + 1; r < m; ++r)
      if (std::abs(A[r * m + c].value()) > std::abs(A[piv * m + c].value())) piv = r;
    if (A[piv * m + c].value() == 0.0) throw GeometryError("singular metric");
    if (piv != c) {
      for (int k = 0; k < m; ++k) {
        std::swap(A[piv * m + k], A[c * m + k]);
        std::swap(B[piv * m + k], B[c * m + k]);
      }
      det = -det;
    }
    det = det * A[c * m + c];
    Jet rp = reciprocal(A[c * m + c]);
    for (int k = 0; k < m; ++k) {
      A[c * m + k] = A[c * m + k] * rp;
      B[c * m + k] = B[c * m + k] * rp;
    }
    for (int r = 0; r < m; ++r) {
      if (r == c) continue;
      Jet f = A[r * m + c];
      for (int k = 0; k < m; ++k) {
        A[r * m + k].add_product(f, A[c * m + k], -1.0);
        B[r * m + k].add_product(f, B[c * m + k], -1.0);
      }
    }
  }
  inv = I;
}

MetricJets metric_at(const MetricField& gf, const std::vector<double>& p, int K) {
  const int m = gf.dim;
  if (static_cast<int>(p.size()) != m) throw GeometryError("point dimension does not match the metric");
  if (K < 0 || K > kMaxOrder) throw GeometryError("jet order out of range");
  MetricJets mj;
  mj.m = m;
  mj.K = K;
  auto comps = gf.eval(coord_jets(p, K));
  mj.g = JTensor(m, 2);
  for (int i = 0; i < m * m; ++i) mj.g[i] = comps[i];
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(mj.g(i, j).value() - mj.g(j, i).value()) > 1e-12 * (1.0 + std::abs(mj.g(i, j).value())))
        throw GeometryError("metric is not symmetric");
  invert_jet_matrix(mj.g, mj.ginv, mj.det);
  mj.ginv.set_upper({true, true});
  if (!(std::abs(mj.det.value()) > kDegenerateDet)) throw GeometryError("degenerate metric: |det g| <= 1e-10");
  mj.vol = sqrt(mj.det.value() < 0 ? -mj.det : mj.det);
  return mj;
}

JTensor christoffel(const MetricJets& mj) {
  const int m = mj.m;
  if (mj.K < 1) throw JetError("jet order budget exhausted: Christoffel symbols need metric order >= 1");
  std::vector<JTensor> dg(m);
  for (int c = 0; c < m; ++c) {
    dg[c] = JTensor(m, 2);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        dg[c](i, j) = mj.g(i, j).derivative(c);
        dg[c](j, i) = dg[c](i, j);
      }
  }
  const int K = mj.K - 1;
  const int nv = mj.g[0].vars();
  JTensor low(m, 3, Jet(nv, K, 0.0));  // Γ_{t,ij}
  for (int t = 0; t < m; ++t)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        Jet v = dg[i](t, j) + dg[j](t, i) - dg[t](i, j);
        v *= 0.5;
        low(t, i, j) = v;
        low(t, j, i) = v;
      }
  JTensor gam(m, 3, Jet(nv, K, 0.0));
  gam.set_upper({true, false, false});
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        Jet& out = gam(k, i, j);
        for (int t = 0; t < m; ++t) out.add_product(mj.ginv(k, t), low(t, i, j));
        gam(k, j, i) = out;
      }
  return gam;
}

void curvature_from_christoffel(Geometry& geo) {
  const int m = geo.m;
  const JTensor& G = geo.gamma;
  if (min_order(G) < 1) throw JetError("jet order budget exhausted: curvature needs Christoffel order >= 1");
  const int K = min_order(G) - 1;
  const int nv = G[0].vars();
  std::vector<JTensor> dG(m);
  for (int c = 0; c < m; ++c) {
    dG[c] = JTensor(m, 3);
    for (std::size_t f = 0; f < G.size(); ++f) dG[c][f] = G[f].derivative(c);
  }
  JTensor Ru(m, 4, Jet(nv, K, 0.0));
  Ru.set_upper({true, false, false, false});
  for (int r = 0; r < m; ++r)
    for (int s = 0; s < m; ++s)
      for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
          Jet v = dG[a](r, b, s) - dG[b](r, a, s);
          for (int l = 0; l < m; ++l) {
            v.add_product(G(r, a, l), G(l, b, s));
            v.add_product(G(r, b, l), G(l, a, s), -1.0);
          }
          Ru(r, s, a, b) = v;
          Ru(r, s, b, a) = -v;
        }
  JTensor Rd(m, 4, Jet(nv, K, 0.0));
  for (int r = 0; r < m; ++r)
    for (int s = 0; s < m; ++s)
      for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
          Jet& out = Rd(r, s, a, b);
          for (int l = 0; l < m; ++l) out.add_product(geo.metric.g(r, l), Ru(l, s, a, b));
          Rd(r, s, b, a) = -out;
        }
  JTensor ric(m, 2, Jet(nv, K, 0.0));
  for (int s = 0; s < m; ++s)
    for (int n = s; n < m; ++n) {
      Jet& out = ric(s, n);
      for (int a = 0; a < m; ++a) out += Ru(a, s, a, n);
      ric(n, s) = out;
    }
  geo.riem_up = std::move(Ru);
  geo.riem = std::move(Rd);
  geo.ric = std::move(ric);
  geo.scalar = trace2(geo.ric, geo.metric.ginv);
}

Geometry compute_geometry(const MetricField& g, const std::vector<double>& p, int K, bool curvature) {
  Geometry geo;
  geo.m = g.dim;
  geo.K = K;
  geo.metric = metric_at(g, p, K);
  if (K >= 1) geo.gamma = christoffel(geo.metric);
  if (curvature) {
    if (K < 2) throw JetError("jet order budget exhausted: curvature needs metric order >= 2");
    curvature_from_christoffel(geo);
  }
  return geo;
}

JTensor covariant_derivative(const JTensor& T, const JTensor& gamma) {
  const int m = T.dim();
  const int r = T.rank();
  const int K = min_order(T);
  if (K < 1) throw JetError("jet order budget exhausted: covariant derivative of an order-0 tensor");
  const int nv = T[0].vars();
  JTensor out(m, r + 1, Jet(nv, K - 1, 0.0));
  std::vector<bool> up = T.upper();
  up.push_back(false);
  out.set_upper(up);
  std::vector<int> idx(r + 1), src(r);
  for (std::size_t f = 0; f < T.size(); ++f) {
    T.unflatten(f, idx.data());
    for (int c = 0; c < m; ++c) {
      idx[r] = c;
      Jet v = T[f].derivative(c);
      for (int s = 0; s < r; ++s) {
        std::copy(idx.begin(), idx.begin() + r, src.begin());
        const int i = idx[s];
        for (int l = 0; l < m; ++l) {
          src[s] = l;
          if (T.upper()[s])
            v.add_product(gamma(i, c, l), T.at(src.data()));
          else
            v.add_product(gamma(l, c, i), T.at(src.data()), -1.0);
        }
      }
      out.at(idx.data()) = std::move(v);
    }
  }
  return out;
}

JTensor covariant_derivative(const Jet& f, int m) {
  JTensor out(m, 1);
  for (int c = 0; c < m; ++c) out(c) = f.derivative(c);
  return out;
}

JTensor raise_first(const JTensor& T, const JTensor& ginv) {
  const int m = T.dim();
  JTensor out(m, T.rank());
  std::vector<bool> up = T.upper();
  up[0] = true;
  out.set_upper(up);
  std::size_t stride = T.size() / m;
  for (int i = 0; i < m; ++i)
    for (std::size_t rest = 0; rest < stride; ++rest) {
      Jet v(T[0].vars(), std::min(min_order(T), ginv[0].order()), 0.0);
      for (int l = 0; l < m; ++l) v.add_product(ginv(i, l), T[l * stride + rest]);
      out[i * stride + rest] = std::move(v);
    }
  return out;
}

Jet trace2(const JTensor& T, const JTensor& ginv) {
  const int m = T.dim();
  Jet v(T[0].vars(), std::min(min_order(T), ginv[0].order()), 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) v.add_product(ginv(i, j), T(i, j));
  return v;
}

Jet inner2(const JTensor& A, const JTensor& B, const JTensor& ginv) {
  // g^{ik} g^{jl} A_ij B_kl = A^k_j g^{jl} B_kl
  JTensor Au = raise_first(A, ginv);
  const int m = A.dim();
  Jet v(A[0].vars(), std::min(min_order(Au), min_order(B)), 0.0);
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) {
      Jet t(A[0].vars(), v.order(), 0.0);
      for (int j = 0; j < m; ++j) t.add_product(Au(k, j), ginv(j, l));
      v.add_product(t, B(k, l));
    }
  return v;
}

JTensor kulkarni_nomizu(const JTensor& T, const JTensor& V) {
  const int m = T.dim();
  const int K = std::min(min_order(T), min_order(V));
  JTensor out(m, 4, Jet(T[0].vars(), K, 0.0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) {
          Jet& o = out(i, j, k, t);
          o.add_product(T(i, k), V(j, t));
          o.add_product(T(i, t), V(j, k), -1.0);
          o.add_product(T(j, t), V(i, k));
          o.add_product(T(j, k), V(i, t), -1.0);
        }
  return out;
}

Frame Frame::scaled(double s) const {
  Frame f = *this;
  f.e *= s;
  f.theta /= s;
  return f;
}

Eigen::MatrixXd to_matrix(const DTensor& t2) {
  const int m = t2.dim();
  Eigen::MatrixXd M(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) M(i, j) = t2(i, j);
  return M;
}

DTensor from_matrix(const Eigen::MatrixXd& M) {
  DTensor t(static_cast<int>(M.rows()), 2, 0.0);
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) t(i, j) = M(i, j);
  return t;
}

Frame orthonormal_frame(const DTensor& g) {
  const int m = g.dim();
  Eigen::MatrixXd G = to_matrix(g);
  if (!(std::abs(G.determinant()) > kDegenerateDet)) throw GeometryError("degenerate metric: no orthonormal frame");
  Frame F;
  F.m = m;
  F.e = Eigen::MatrixXd::Zero(m, m);
  F.eta.assign(m, 0.0);
  bool diagonal = true;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j && G(i, j) != 0.0) diagonal = false;
  if (diagonal) {
    // coordinate order, positive directions first
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return G(a, a) > 0 && G(b, b) < 0; });
    for (int i = 0; i < m; ++i) {
      const int c = order[i];
      F.e(i, c) = 1.0 / std::sqrt(std::abs(G(c, c)));
      F.eta[i] = G(c, c) > 0 ? 1.0 : -1.0;
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    for (int i = 0; i < m; ++i) {
      const int c = m - 1 - i;  // descending eigenvalues
      const double lam = es.eigenvalues()(c);
      Eigen::VectorXd v = es.eigenvectors().col(c);
      Eigen::Index big = 0;
      v.cwiseAbs().maxCoeff(&big);
      if (v(big) < 0) v = -v;
      F.e.row(i) = v.transpose() / std::sqrt(std::abs(lam));
      F.eta[i] = lam > 0 ? 1.0 : -1.0;
    }
  }
  F.theta = F.e.transpose().inverse();
  return F;
}

DTensor frame_components(const DTensor& T, const Frame& F) {
  const int m = T.dim();
  if (m != F.m) throw GeometryError("frame and tensor dimensions differ");
  DTensor cur = T;
  const int r = T.rank();
  std::vector<int> idx(r), src(r);
  for (int s = 0; s < r; ++s) {
    const Eigen::MatrixXd& P = T.upper()[s] ? F.theta : F.e;
    DTensor next(m, r, 0.0);
    for (std::size_t f = 0; f < next.size(); ++f) {
      next.unflatten(f, idx.data());
      src = idx;
      double v = 0.0;
      for (int mu = 0; mu < m; ++mu) {
        src[s] = mu;
        v += P(idx[s], mu) * cur.at(src.data());
      }
      next[f] = v;
    }
    cur = std::move(next);
  }
  cur.set_upper(T.upper());
  return cur;
}

BianchiResiduals bianchi_residuals(const MetricField& g, const std::vector<double>& p) {
  Geometry geo = compute_geometry(g, p, 3);
  const int m = geo.m;
  BianchiResiduals r;
  const JTensor& R = geo.riem;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) {
          double s = R(a, b, c, d).value() + R(a, c, d, b).value() + R(a, d, b, c).value();
          r.first = std::max(r.first, std::abs(s));
        }
  JTensor dR = covariant_derivative(R, geo.gamma);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d)
          for (int e = 0; e < m; ++e) {
            double s = dR(a, b, c, d, e).value() + dR(a, b, d, e, c).value() + dR(a, b, e, c, d).value();
            r.second = std::max(r.second, std::abs(s));
          }
  return r;
}

double riemann_symmetry_residual(const DTensor& R) {
  const int m = R.dim();
  double r = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) {
          r = std::max(r, std::abs(R(a, b, c, d) + R(b, a, c, d)));
          r = std::max(r, std::abs(R(a, b, c, d) + R(a, b, d, c)));
          r = std::max(r, std::abs(R(a, b, c, d) - R(c, d, a, b)));
          r = std::max(r, std::abs(R(a, b, c, d) + R(a, c, d, b) + R(a, d, b, c)));
        }
  return r;
}

}  // namespace phg
