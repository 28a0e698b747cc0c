#include "phg/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "phg/oracle.hpp"
#include "phg/phicurv.hpp"

namespace phg {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
  return s;
}

std::string idx(const std::string& field, int i) { return field + "[" + std::to_string(i) + "]"; }
std::string idx(const std::string& field, int i, int j) { return idx(field, i) + "[" + std::to_string(j) + "]"; }

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> diagnostics)
    : std::runtime_error(join(diagnostics)), diag_(std::move(diagnostics)) {}

bool Scenario::has_tag(const std::string& t) const {
  return std::find(spec.tags.begin(), spec.tags.end(), t) != spec.tags.end();
}

ClosedSetup Scenario::closed_setup(int nodes, int threads) const {
  if (!closed()) throw ScenarioError({name() + ": not a closed (fully periodic) scenario"});
  const int N = nodes > 0 ? nodes : spec.grid_nodes;
  if (N <= 0) throw ScenarioError({name() + ": no quadrature grid configured"});
  return {chart, g, phi, alpha, make_grid(chart, N), threads};
}

const std::vector<std::string>& known_tags() {
  static const std::vector<std::string> tags = {"flat",   "sphere",           "constant-map",      "phi-ricci-flat",
                                                "harmonic-einstein", "lorentzian", "closed", "conformally-flat",
                                                "static-kernel", "generic"};
  return tags;
}

std::vector<std::vector<double>> halton_samples(const Chart& chart, int count, std::uint64_t seed) {
  static const int primes[] = {2, 3, 5, 7, 11, 13};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> shift(chart.dim);
  for (auto& s : shift) s = U(rng);
  std::vector<std::vector<double>> pts;
  for (int k = 1; k <= count; ++k) {
    std::vector<double> p(chart.dim);
    for (int i = 0; i < chart.dim; ++i) {
      double h = 0, f = 1.0 / primes[i];
      for (int n = k; n > 0; n /= primes[i], f /= primes[i]) h += f * (n % primes[i]);
      double t = h + shift[i];
      t -= std::floor(t);
      if (!chart.periodic[i]) t = 0.05 + 0.9 * t;
      p[i] = chart.lo[i] + t * (chart.hi[i] - chart.lo[i]);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

// ---- assembly

namespace {

std::shared_ptr<const TargetGeometry> make_target(const TargetSpec& t, std::vector<std::string>& diag) {
  if (t.dim < 1 || t.dim > kMaxVars) {
    diag.push_back("target.dim: must be in 1.." + std::to_string(kMaxVars));
    return nullptr;
  }
  if (t.kind == "flat") return TargetGeometry::flat(t.dim);
  if (t.kind == "round_sphere") return TargetGeometry::round_sphere(t.dim);
  if (t.kind != "custom") {
    diag.push_back("target.kind: expected flat, round_sphere or custom, got '" + t.kind + "'");
    return nullptr;
  }
  if (static_cast<int>(t.metric.size()) != t.dim * t.dim) {
    diag.push_back("target.metric: needs " + std::to_string(t.dim) + "x" + std::to_string(t.dim) + " entries");
    return nullptr;
  }
  std::vector<Expr> e;
  for (int i = 0; i < t.dim * t.dim; ++i) {
    try {
      e.push_back(Expr::parse(t.metric[i]));
      if (e.back().x_arity() > 0) diag.push_back(idx("target.metric", i / t.dim, i % t.dim) + ": uses source coordinates");
      if (e.back().y_arity() > t.dim) diag.push_back(idx("target.metric", i / t.dim, i % t.dim) + ": coordinate beyond target dimension");
    } catch (const ParseError& err) {
      diag.push_back(idx("target.metric", i / t.dim, i % t.dim) + ": " + err.what());
    }
  }
  if (static_cast<int>(e.size()) != t.dim * t.dim) return nullptr;
  return TargetGeometry::from_metric(t.dim, e);
}

Expr parse_field(const std::string& field, const std::string& text, int dim, std::vector<std::string>& diag,
                 bool& ok) {
  try {
    Expr e = Expr::parse(text);
    if (e.y_arity() > 0) diag.push_back(field + ": target coordinates are not allowed here"), ok = false;
    if (e.x_arity() > dim) diag.push_back(field + ": uses a coordinate beyond dimension " + std::to_string(dim)), ok = false;
    return e;
  } catch (const ParseError& err) {
    diag.push_back(field + ": " + err.what());
    ok = false;
    return Expr(0.0);
  }
}

double max_abs_values(const JTensor& t) { return max_abs(values(t)); }

TagCheck run_tag(const Scenario& s, const std::string& tag) {
  TagCheck c{tag, 0.0, kTagTolerance, false};
  const int m = s.dim();
  double r = 0.0;
  for (const auto& p : s.samples) {
    if (tag == "flat") {
      r = std::max(r, max_abs_values(compute_geometry(s.g, p, 2).riem));
    } else if (tag == "sphere") {
      Geometry geo = compute_geometry(s.g, p, 2);
      r = std::max(r, max_abs_diff(values(geo.riem), oracle::constant_curvature_riemann(values(geo.g()), 1.0)));
    } else if (tag == "constant-map") {
      for (const auto& j : s.phi.eval(coord_jets(p, 1)))
        for (int i = 0; i < m; ++i) r = std::max(r, std::abs(j.derivative(i).value()));
    } else if (tag == "phi-ricci-flat") {
      r = std::max(r, max_abs_values(compute_phi(s.g, s.phi, s.alpha, p, 2, PhiOptions{false, false}).ric_phi));
    } else if (tag == "harmonic-einstein") {
      auto h = harmonic_einstein_residual(compute_phi(s.g, s.phi, s.alpha, p, 2, PhiOptions{false, false}));
      r = std::max({r, h.traceless_ricci, h.tension});
    } else if (tag == "conformally-flat") {
      if (m >= 4) r = std::max(r, max_abs(oracle::classical_curvatures(s.g, p, 2).weyl));
      else if (m == 3) r = std::max(r, max_abs(oracle::classical_curvatures(s.g, p, 3).cotton));
    } else if (tag == "static-kernel") {
      r = std::max(r, max_residual(kernel_system_residual(s.g, s.phi, s.alpha, s.fields.at("u"), p)));
    } else if (tag == "closed") {
      // every scalar the suites integrate must be periodic, including maps that wind
      auto scalars = [&](const std::vector<double>& x) {
        PhiBundle b = compute_phi(s.g, s.phi, s.alpha, x, 2, PhiOptions{false, false});
        std::vector<double> v = {b.geo.metric.vol.value(), b.s_phi.value(), b.map.energy.value(),
                                 target_dot(b.map, b.map.tau, 0, b.map.tau, 0).value()};
        for (double gv : values(b.geo.g()).data()) v.push_back(gv);
        return v;
      };
      auto a = scalars(p);
      for (int i = 0; i < m; ++i) {
        auto q = p;
        q[i] += s.chart.period(i);
        auto b = scalars(q);
        for (std::size_t k = 0; k < a.size(); ++k) r = std::max(r, std::abs(a[k] - b[k]) / std::max(1.0, std::abs(a[k])));
      }
    }
  }
  if (tag == "lorentzian") r = s.chart.n_neg == 1 ? 0.0 : 1.0;
  if (tag == "closed" && !s.closed()) r = INFINITY;
  c.residual = r;
  c.pass = r <= c.tolerance;
  return c;
}

}  // namespace

Scenario assemble(const ScenarioSpec& spec) {
  std::vector<std::string> diag;
  const int m = spec.dim;
  const std::string& nm = spec.name;
  if (nm.empty()) diag.push_back("name: must not be empty");
  if (m < 1 || m > kMaxVars) throw ScenarioError({"dim: must be in 1.." + std::to_string(kMaxVars)});
  Scenario s;
  s.spec = spec;
  s.alpha = spec.alpha;
  if (!std::isfinite(spec.alpha)) diag.push_back("alpha: must be finite");

  // chart
  Chart& c = s.chart;
  c.dim = m;
  c.lo = spec.lo.empty() ? std::vector<double>(m, 0.0) : spec.lo;
  if (static_cast<int>(c.lo.size()) != m) diag.push_back("lo: needs " + std::to_string(m) + " entries");
  if (static_cast<int>(spec.periods.size()) != m) diag.push_back("periods: needs " + std::to_string(m) + " entries");
  c.periodic = spec.periodic.empty() ? std::vector<bool>(m, true) : spec.periodic;
  if (static_cast<int>(c.periodic.size()) != m) diag.push_back("periodic: needs " + std::to_string(m) + " entries");
  if (!diag.empty()) throw ScenarioError(diag);
  for (int i = 0; i < m; ++i) {
    if (!(spec.periods[i] > 0)) diag.push_back(idx("periods", i) + ": must be positive");
    c.hi.push_back(c.lo[i] + spec.periods[i]);
  }
  if (spec.grid_nodes < 0) diag.push_back("grid.nodes: must be non-negative");
  if (spec.grid_nodes > 0 && !c.fully_periodic()) diag.push_back("grid.nodes: quadrature needs every axis periodic");

  // fields
  if (static_cast<int>(spec.metric.size()) != m * m)
    diag.push_back("metric: needs a " + std::to_string(m) + "x" + std::to_string(m) + " matrix");
  auto target = make_target(spec.target, diag);
  if (target && static_cast<int>(spec.map.size()) != target->dim())
    diag.push_back("map: needs " + std::to_string(target->dim()) + " components (target.dim)");
  for (const auto& t : spec.tags)
    if (std::find(known_tags().begin(), known_tags().end(), t) == known_tags().end())
      diag.push_back("tags: unknown tag '" + t + "'");
  if (!diag.empty()) throw ScenarioError(diag);

  bool ok = true;
  std::vector<Expr> ge, pe;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) ge.push_back(parse_field(idx("metric", i, j), spec.metric[i * m + j], m, diag, ok));
  for (std::size_t a = 0; a < spec.map.size(); ++a)
    pe.push_back(parse_field(idx("map", static_cast<int>(a)), spec.map[a], m, diag, ok));
  for (const auto& [key, text] : spec.fields) {
    Expr e = parse_field("fields." + key, text, m, diag, ok);
    if (ok) s.fields[key] = ScalarField::from_expr(e);
  }
  if (!ok) throw ScenarioError(diag);
  s.g = MetricField::from_exprs(m, ge);
  s.phi = MapField::from_exprs(m, target, pe);
  s.samples = halton_samples(c, kSampleCount, spec.sample_seed);

  // symmetry, nondegeneracy and signature at the samples
  int npos = -1, nneg = -1;
  for (int i = 0; i < m && diag.empty(); ++i)
    for (int j = i + 1; j < m; ++j) {
      double d = 0;
      for (const auto& p : s.samples) d = std::max(d, std::abs(ge[i * m + j].eval(p) - ge[j * m + i].eval(p)));
      if (d > 1e-14) diag.push_back(idx("metric", i, j) + " and " + idx("metric", j, i) + ": not symmetric (differ by " +
                                    std::to_string(d) + ")");
    }
  if (!diag.empty()) throw ScenarioError(diag);
  for (std::size_t k = 0; k < s.samples.size(); ++k) {
    Eigen::MatrixXd G = to_matrix(s.g.value_at(s.samples[k]));
    if (!G.allFinite()) {
      diag.push_back("metric: not finite at sample " + std::to_string(k));
      break;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    int p = 0, q = 0;
    for (int i = 0; i < m; ++i) (es.eigenvalues()[i] > 0 ? p : q)++;
    if (std::abs(G.determinant()) < kDegenerateDet) {
      diag.push_back("metric: degenerate at sample " + std::to_string(k));
      break;
    }
    if (npos < 0) npos = p, nneg = q;
    if (p != npos) {
      diag.push_back("metric: signature changes inside the chart");
      break;
    }
  }
  if (!diag.empty()) throw ScenarioError(diag);
  c.n_pos = npos;
  c.n_neg = nneg;
  if (!spec.signature.empty() && (spec.signature.size() != 2 || spec.signature[0] != npos || spec.signature[1] != nneg))
    diag.push_back("signature: declared does not match the metric (" + std::to_string(npos) + "," +
                   std::to_string(nneg) + ")");
  if (s.has_tag("static-kernel") && !s.fields.count("u")) diag.push_back("fields.u: required by tag static-kernel");
  if (!diag.empty()) throw ScenarioError(diag);
  c.validate();
  s.spec.signature = {npos, nneg};

  for (const auto& t : spec.tags) s.tag_checks.push_back(run_tag(s, t));
  for (const auto& [key, value] : spec.recorded) {
    TagCheck tc{"recorded:" + key, 0.0, kTagTolerance, false};
    if (key != "S_phi") {
      diag.push_back("recorded." + key + ": unknown quantity");
      continue;
    }
    for (const auto& p : s.samples)
      tc.residual = std::max(tc.residual, std::abs(compute_phi(s.g, s.phi, s.alpha, p, 2, PhiOptions{false, false}).s_phi.value() - value));
    tc.pass = tc.residual <= tc.tolerance;
    s.tag_checks.push_back(tc);
  }
  for (const auto& tc : s.tag_checks)
    if (!tc.pass) diag.push_back("tags: '" + tc.tag + "' fails its check (residual " + std::to_string(tc.residual) + ")");
  if (!diag.empty()) throw ScenarioError(diag);
  return s;
}

// ---- registry

namespace {

constexpr double kTau = 2.0 * 3.14159265358979323846;

std::vector<std::string> diag_metric(int m, const std::vector<std::string>& d) {
  std::vector<std::string> g(m * m, "0");
  for (int i = 0; i < m; ++i) g[i * m + i] = d[i];
  return g;
}

std::vector<std::string> sym_metric(int m, const std::vector<std::string>& upper) {  // row-major upper triangle
  std::vector<std::string> g(m * m);
  std::size_t k = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) g[i * m + j] = g[j * m + i] = upper[k++];
  return g;
}

ScenarioSpec torus(const std::string& name, int m, std::vector<std::string> metric, TargetSpec target,
                   std::vector<std::string> map, double alpha, int grid, std::vector<std::string> tags) {
  ScenarioSpec s;
  s.name = name;
  s.dim = m;
  s.periods.assign(m, kTau);
  s.metric = std::move(metric);
  s.target = std::move(target);
  s.map = std::move(map);
  s.alpha = alpha;
  s.grid_nodes = grid;
  s.tags = std::move(tags);
  s.tags.push_back("closed");
  return s;
}

ScenarioSpec boxed(const std::string& name, int m, double half, std::vector<std::string> metric, TargetSpec target,
                   std::vector<std::string> map, double alpha, std::vector<std::string> tags) {
  ScenarioSpec s;
  s.name = name;
  s.dim = m;
  s.lo.assign(m, -half);
  s.periods.assign(m, 2 * half);
  s.periodic.assign(m, false);
  s.metric = std::move(metric);
  s.target = std::move(target);
  s.map = std::move(map);
  s.alpha = alpha;
  s.tags = std::move(tags);
  return s;
}

std::vector<std::string> identity_n(int m) {
  std::vector<std::string> v(m * m, "0");
  for (int i = 0; i < m; ++i) v[i * m + i] = "1";
  return v;
}

std::vector<std::string> round_sphere_metric(int m) {
  std::string r = "1";
  for (int i = 1; i <= m; ++i) r += "+x" + std::to_string(i) + "^2";
  return diag_metric(m, std::vector<std::string>(m, "4/(" + r + ")^2"));
}

std::vector<std::string> coords(int m) {
  std::vector<std::string> v;
  for (int i = 1; i <= m; ++i) v.push_back("x" + std::to_string(i));
  return v;
}

TargetSpec flat_target(int n) { return {n, "flat", {}}; }
TargetSpec sphere_target(int n) { return {n, "round_sphere", {}}; }

std::vector<ScenarioSpec> make_builtins() {
  std::vector<ScenarioSpec> v;
  auto add = [&](ScenarioSpec s, const std::string& description) {
    s.description = description;
    v.push_back(std::move(s));
  };

  for (int m = 2; m <= 5; ++m) {
    const int grid = m <= 3 ? 16 : (m == 4 ? 8 : 0);
    add(torus("flat-t" + std::to_string(m) + "-const", m, identity_n(m), flat_target(1), {"0.5"}, 1.0, grid,
              {"flat", "phi-ricci-flat", "constant-map"}),
        "flat torus, constant map");
  }
  add(torus("t2-perturbed-spheremap", 2,
            sym_metric(2, {"1+0.1*sin(x1+x2)", "0.03*cos(x1)", "1+0.08*cos(x2)"}), sphere_target(2),
            {"0.3*sin(x1)+0.1", "0.4*cos(x2)+0.1*sin(x1+x2)"}, 0.6, 16, {"generic"}),
        "perturbed T2, map into the round S2");
  add(torus("t3-perturbed-torusmap", 3,
            sym_metric(3, {"1+0.1*sin(x1+x2)", "0.03*cos(x3)", "0.02*sin(x1+x2)", "1+0.08*cos(x2-x3)",
                           "0.03*sin(x1)", "1+0.06*sin(x3)+0.04*cos(x1)"}),
            flat_target(2), {"x1+0.2*sin(x2)", "x2+0.15*cos(x1+x3)"}, 0.9, 16, {"generic"}),
        "perturbed T3, linear plus sinusoidal map into T2");
  add(torus("t3-torusmap-flat", 3, identity_n(3), flat_target(2), {"x1+0.3*sin(x2)", "x2+0.2*cos(x3)"}, 0.8, 16,
            {"flat"}),
        "flat T3, nonconstant map into T2 (S^phi < 0 somewhere)");
  add(torus("t3-spheremap", 3,
            sym_metric(3, {"1+0.05*cos(x1)", "0.02*sin(x3)", "0", "1+0.05*sin(x2+x3)", "0.02*cos(x1)",
                           "1+0.04*cos(x3)"}),
            sphere_target(2), {"0.3*sin(x1)+0.2*cos(x3)", "0.4*cos(x2)+0.1"}, 0.7, 16, {"generic"}),
        "perturbed T3, map into the round S2");
  add(torus("t3-hyperbolic-target", 3, identity_n(3), TargetSpec{2, "custom", {"1/y2^2", "0", "0", "1/y2^2"}},
            {"x1+0.3*sin(x2)", "2+0.5*sin(x1+x3)"}, 0.5, 16, {"flat"}),
        "flat T3, map into the hyperbolic half-plane");
  add(torus("t3-torusmap-he", 3, identity_n(3), flat_target(3), {"x1+x2", "x2-x1", "1.4142135623730951*x3"}, 0.6, 16,
            {"flat", "harmonic-einstein"}),
      "flat T3, linear map with A^T A = 2I; Ric^phi = -2 alpha g, tau = 0");
  v.back().recorded["S_phi"] = -3.6;
  add(torus("t4-perturbed-torusmap", 4,
            sym_metric(4, {"1+0.05*sin(x1+x2)+0.03*cos(x3)", "0.02*sin(x3+x4)", "0.015*cos(x1+x2)", "0.01*sin(x2)",
                           "1+0.04*cos(x2-x4)+0.02*sin(x1)", "0.02*cos(x1-x4)", "0.015*sin(x3)",
                           "1+0.05*sin(x3+x4)+0.02*cos(x2)", "0.01*cos(x1+x2+x3)", "1+0.03*cos(x1-x3)+0.04*sin(x4)"}),
            flat_target(2), {"x1+0.1*sin(x2+x3)", "x2+0.1*cos(x4)+0.05*sin(x1)"}, 1.0, 8, {"generic"}),
        "g = delta + 0.1 (low-frequency symmetric field), linear plus sinusoidal map into T2");
  add(torus("t4-torusmap-he", 4, identity_n(4), flat_target(4), {"x1+x2", "x2-x1", "x3+x4", "x4-x3"}, 1.0, 8,
            {"flat", "harmonic-einstein"}),
        "flat T4, linear map with A^T A = 2I; Ric^phi = -2 alpha g, tau = 0");
  v.back().recorded["S_phi"] = -8.0;
  add(torus("t4-conformal-flat", 4, diag_metric(4, std::vector<std::string>(4, "exp(0.2*sin(x1)*cos(x2)+0.1*cos(x3+x4))")),
            flat_target(2), {"x1+0.2*sin(x3)", "x2+0.1*cos(x4)"}, 0.8, 8, {"conformally-flat"}),
        "conformally flat T4 with a sinusoidal torus map");
  v.back().fields["f"] = "0.15*sin(x1+x2)+0.1*cos(x4)";
  add(torus("t4-lorentz-perturbed", 4,
            sym_metric(4, {"-1+0.05*sin(x2)", "0.02*cos(x3)", "0", "0.01*sin(x1+x4)", "1+0.05*cos(x1+x3)", "0",
                           "0.02*sin(x4)", "1+0.04*sin(x2-x4)", "0", "1+0.03*cos(x3)"}),
            flat_target(2), {"x2+0.1*sin(x1)", "x3+0.1*cos(x4)"}, 1.0, 0, {"lorentzian"}),
        "Lorentzian (3,1) torus, perturbed");
  v.back().signature = {3, 1};
  add(torus("t5-perturbed-torusmap", 5,
            sym_metric(5, {"1+0.08*sin(x1+x5)", "0.02*cos(x3)", "0", "0.01*sin(x4)", "0", "1+0.06*cos(x2)",
                           "0.02*sin(x1+x3)", "0", "0.01*cos(x5)", "1+0.05*sin(x3-x4)", "0.02*cos(x2)", "0",
                           "1+0.07*cos(x4+x5)", "0.015*sin(x1)", "1+0.05*sin(x5)+0.03*cos(x2)"}),
            flat_target(2), {"x1+0.15*sin(x4)", "x3+0.1*cos(x2+x5)"}, 0.7, 0, {"generic"}),
        "perturbed T5, map into T2");

  add(boxed("sphere2-const", 2, 1.0, round_sphere_metric(2), flat_target(1), {"0.3"}, 1.0,
            {"sphere", "constant-map", "harmonic-einstein"}),
      "unit S2 in a stereographic chart, constant map");
  add(boxed("sphere3-identity", 3, 1.0, round_sphere_metric(3), sphere_target(3), coords(3), 1.0,
            {"sphere", "harmonic-einstein", "conformally-flat"}),
      "unit S3, identity map, alpha = 1; S^phi = m(m-1-alpha) = 3");
  v.back().recorded["S_phi"] = 3.0;
  add(boxed("sphere4-identity", 4, 1.0, round_sphere_metric(4), sphere_target(4), coords(4), 1.0,
            {"sphere", "harmonic-einstein", "conformally-flat"}),
      "unit S4, identity map, alpha = 1; S^phi = 8");
  v.back().recorded["S_phi"] = 8.0;
  add(boxed("minkowski4-chunk", 4, 1.0, diag_metric(4, {"-1", "1", "1", "1"}), flat_target(1),
            {"0.2*x1+0.4*sin(x2+x3)"}, 1.0, {"flat", "lorentzian"}),
      "a chunk of Minkowski space with a wave-like scalar map");
  add(boxed("static-plane-kernel", 2, 1.0, identity_n(2), flat_target(1), {"0.7/sqrt(1.3)*x2"}, 1.3,
            {"flat", "static-kernel"}),
      "flat plane, phi = (k/sqrt(alpha)) x2 and u = exp(k x1) in the kernel of the adjoint (k = 0.7)");
  v.back().fields["u"] = "exp(0.7*x1)";
  add(boxed("warped-static-lorentz", 3, 1.0, diag_metric(3, {"1", "1", "-exp(1.4*x1)"}), flat_target(1),
            {"0.7/sqrt(1.3)*x2"}, 1.3, {"lorentzian", "harmonic-einstein"}),
      "static warped product dx1^2 + dx2^2 - u^2 dt^2 with u = exp(0.7 x1); Ric^phi = -k^2 g");
  v.back().recorded["S_phi"] = -3 * 0.49;
  return v;
}

}  // namespace

const std::vector<ScenarioSpec>& builtin_specs() {
  static const std::vector<ScenarioSpec> specs = make_builtins();
  return specs;
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> n;
  for (const auto& s : builtin_specs()) n.push_back(s.name);
  return n;
}

Scenario builtin(const std::string& name) {
  for (const auto& s : builtin_specs())
    if (s.name == name) return assemble(s);
  throw ScenarioError({"unknown scenario '" + name + "'"});
}

// ---- config files

json to_json(const ScenarioSpec& s) {
  json j;
  j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  j["dim"] = s.dim;
  if (!s.signature.empty()) j["signature"] = s.signature;
  if (!s.lo.empty()) j["lo"] = s.lo;
  j["periods"] = s.periods;
  if (!s.periodic.empty()) j["periodic"] = s.periodic;
  json g = json::array();
  for (int i = 0; i < s.dim; ++i) {
    json row = json::array();
    for (int k = 0; k < s.dim; ++k) row.push_back(s.metric[i * s.dim + k]);
    g.push_back(row);
  }
  j["metric"] = g;
  json t = {{"dim", s.target.dim}, {"kind", s.target.kind}};
  if (s.target.kind == "custom") {
    json tm = json::array();
    for (int i = 0; i < s.target.dim; ++i) {
      json row = json::array();
      for (int k = 0; k < s.target.dim; ++k) row.push_back(s.target.metric[i * s.target.dim + k]);
      tm.push_back(row);
    }
    t["metric"] = tm;
  }
  j["target"] = t;
  j["map"] = s.map;
  j["alpha"] = s.alpha;
  j["grid"] = {{"nodes", s.grid_nodes}};
  j["seeds"] = {{"samples", s.sample_seed}};
  if (!s.fields.empty()) j["fields"] = s.fields;
  if (!s.recorded.empty()) j["recorded"] = s.recorded;
  j["tags"] = s.tags;
  return j;
}

namespace {

template <class T>
bool read(const json& j, const std::string& key, T& out, std::vector<std::string>& diag, bool required) {
  if (!j.contains(key)) {
    if (required) diag.push_back(key + ": missing");
    return false;
  }
  try {
    out = j.at(key).get<T>();
    return true;
  } catch (const json::exception& e) {
    diag.push_back(key + ": wrong type (" + std::string(e.what()) + ")");
    return false;
  }
}

bool read_matrix(const json& j, const std::string& key, int n, std::vector<std::string>& out,
                 std::vector<std::string>& diag) {
  std::vector<std::vector<std::string>> rows;
  if (!read(j, key, rows, diag, true)) return false;
  if (static_cast<int>(rows.size()) != n) {
    diag.push_back(key + ": needs " + std::to_string(n) + " rows");
    return false;
  }
  out.clear();
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) {
      diag.push_back(idx(key, i) + ": needs " + std::to_string(n) + " entries");
      return false;
    }
    for (const auto& e : rows[i]) out.push_back(e);
  }
  return true;
}

}  // namespace

ScenarioSpec spec_from_json(const json& j) {
  std::vector<std::string> diag;
  if (!j.is_object()) throw ScenarioError({"config: top level must be an object"});
  ScenarioSpec s;
  read(j, "name", s.name, diag, true);
  read(j, "description", s.description, diag, false);
  read(j, "dim", s.dim, diag, true);
  read(j, "signature", s.signature, diag, false);
  read(j, "lo", s.lo, diag, false);
  read(j, "periods", s.periods, diag, true);
  read(j, "periodic", s.periodic, diag, false);
  if (s.dim >= 1 && s.dim <= kMaxVars) read_matrix(j, "metric", s.dim, s.metric, diag);
  if (j.contains("target")) {
    const json& t = j.at("target");
    read(t, "dim", s.target.dim, diag, true);
    read(t, "kind", s.target.kind, diag, false);
    if (s.target.kind == "custom" && s.target.dim >= 1 && s.target.dim <= kMaxVars) {
      std::vector<std::string> sub;
      read_matrix(t, "metric", s.target.dim, s.target.metric, sub);
      for (auto& d : sub) diag.push_back("target." + d);
    }
  } else {
    diag.push_back("target: missing");
  }
  read(j, "map", s.map, diag, true);
  read(j, "alpha", s.alpha, diag, true);
  if (j.contains("grid")) read(j.at("grid"), "nodes", s.grid_nodes, diag, false);
  if (j.contains("seeds")) read(j.at("seeds"), "samples", s.sample_seed, diag, false);
  read(j, "fields", s.fields, diag, false);
  read(j, "recorded", s.recorded, diag, false);
  read(j, "tags", s.tags, diag, false);
  if (!diag.empty()) throw ScenarioError(diag);
  return s;
}

Scenario load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({"config: cannot read '" + path + "'"});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError({"config: " + std::string(e.what())});
  }
  return assemble(spec_from_json(j));
}

void save_config(const ScenarioSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError({"config: cannot write '" + path + "'"});
  out << to_json(spec).dump(2) << "\n";
}

}  // namespace phg
