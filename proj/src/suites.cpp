#include "phg/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "phg/conformal.hpp"
#include "phg/oracle.hpp"
#include "phg/parallel.hpp"
#include "phg/phicurv.hpp"
#include "phg/warped.hpp"

namespace phg {

const char* status_name(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    default: return "SKIP";
  }
}

bool SuiteReport::all_pass() const { return count(Status::fail) == 0; }

int SuiteReport::count(Status s) const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [s](const CheckRecord& c) { return c.status == s; }));
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> n = {"curvature", "phicurv", "conformal", "warped", "variational"};
  return n;
}

namespace {

// Collects records in a fixed order.
struct Recorder {
  std::vector<CheckRecord> out;
  void value(const std::string& check, const std::string& anchor, double residual, double tol,
             const std::string& note = "") {
    const bool ok = std::isfinite(residual) && residual <= tol;
    out.push_back({check, anchor, residual, tol, ok ? Status::pass : Status::fail, note});
  }
  // two integrals that should agree; both below kBothSmall counts as agreement
  void pair(const std::string& check, const std::string& anchor, const DualityResult& d, double tol) {
    if (std::abs(d.lhs) <= kBothSmall && std::abs(d.rhs) <= kBothSmall && !(d.rel <= tol))
      value(check, anchor, std::max(std::abs(d.lhs), std::abs(d.rhs)), kBothSmall, "both sides below the absolute floor");
    else
      value(check, anchor, d.rel, tol);
  }
  void skip(const std::string& check, const std::string& anchor, const std::string& why) {
    out.push_back({check, anchor, 0.0, 0.0, Status::skip, why});
  }
};

// Max of named residuals over the samples, evaluated in parallel and merged in sample order.
std::map<std::string, double> over_samples(const Scenario& s, int threads,
                                           const std::function<Residuals(const std::vector<double>&)>& f,
                                           std::size_t limit = 0) {
  const std::size_t n = limit ? std::min(limit, s.samples.size()) : s.samples.size();
  std::vector<Residuals> per(n);
  parallel_for(n, threads, [&](std::size_t i) { per[i] = f(s.samples[i]); });
  std::map<std::string, double> r;
  for (const auto& rs : per)
    for (const auto& x : rs) {
      auto it = r.find(x.law);
      // a negative value marks "not computed"
      if (it == r.end()) r[x.law] = x.value;
      else if (x.value < 0 || it->second < 0) it->second = std::min(it->second, x.value);
      else it->second = std::max(it->second, x.value);
    }
  return r;
}

std::string dim_note(int m) { return "not defined for m = " + std::to_string(m); }

std::vector<Expr> scenario_exprs(const Scenario& s) {
  std::vector<Expr> e;
  const int m = s.dim();
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) e.push_back(Expr::parse(s.spec.metric[i * m + j]));
  for (const auto& t : s.spec.map) e.push_back(Expr::parse(t));
  return e;
}

// Scalar factor from the scenario's "f" field or a seeded low-frequency one.
ScalarField factor(const Scenario& s, std::uint64_t seed, Expr* expr = nullptr) {
  Expr e;
  if (s.spec.fields.count("f")) {
    e = Expr::parse(s.spec.fields.at("f"));
  } else {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    e = random_periodic(rng, s.chart, 0.08, 1, 2);
  }
  if (expr) *expr = e;
  return ScalarField::from_expr(e);
}

// ---- curvature

void curvature_suite(const Scenario& s, const SuiteOptions& o, Recorder& rec) {
  const int K = o.jet_order;
  if (K < 2) {
    rec.skip("riemann_symmetries", "algebraic symmetries of the curvature tensor", "jet budget");
  } else {
    auto r = over_samples(s, o.parallel, [&](const std::vector<double>& p) -> Residuals {
      Geometry geo = compute_geometry(s.g, p, 2);
      oracle::Classical cl = oracle::classical_curvatures(s.g, p, 2);
      Residuals out = {{"sym", riemann_symmetry_residual(values(geo.riem))},
                       {"ric", max_abs_diff(values(geo.ric), cl.ric)},
                       {"scalar", std::abs(geo.scalar.value() - cl.scalar)},
                       {"riem", max_abs_diff(values(geo.riem), cl.riem)}};
      if (s.has_tag("sphere"))
        out.push_back({"cc", max_abs_diff(values(geo.riem), oracle::constant_curvature_riemann(values(geo.g()), 1.0))});
      return out;
    });
    rec.value("riemann_symmetries", "algebraic symmetries of the curvature tensor", r["sym"], 1e-10);
    rec.value("classical_riemann", "curvature from Christoffel symbols of the first kind", r["riem"], 1e-10);
    rec.value("classical_ricci", "Ricci contraction against the classical path", r["ric"], 1e-10);
    rec.value("classical_scalar", "scalar curvature against the classical path", r["scalar"], 1e-10);
    if (s.has_tag("sphere")) rec.value("constant_curvature", "unit-sphere curvature closed form", r["cc"], 1e-10);
    else rec.skip("constant_curvature", "unit-sphere curvature closed form", "scenario is not a unit sphere");
  }
  if (K < 3) {
    rec.skip("bianchi_first", "first Bianchi identity", "jet budget");
    rec.skip("bianchi_second", "second Bianchi identity", "jet budget");
  } else {
    auto r = over_samples(s, o.parallel, [&](const std::vector<double>& p) -> Residuals {
      auto b = bianchi_residuals(s.g, p);
      return {{"first", b.first}, {"second", b.second}};
    });
    rec.value("bianchi_first", "first Bianchi identity", r["first"], 1e-10);
    rec.value("bianchi_second", "second Bianchi identity", r["second"], 1e-10);
  }
  // jets against Richardson finite differences on the scenario's own expressions
  auto exprs = scenario_exprs(s);
  auto r = over_samples(
      s, o.parallel,
      [&](const std::vector<double>& p) -> Residuals {
        double w = 0;
        for (const auto& e : exprs)
          if (!e.is_const()) w = std::max(w, oracle::jet_vs_fd(e, p, std::min(3, K)));
        return {{"fd", w}};
      },
      4);
  rec.value("jets_vs_fd", "Taylor jets against extrapolated finite differences", r["fd"], 1e-6, "first 4 samples");
}

// ---- phicurv

void phicurv_suite(const Scenario& s, const SuiteOptions& o, Recorder& rec) {
  const int m = s.dim();
  for (const auto& t : s.tag_checks) rec.value("tag:" + t.tag, "construction check of the scenario tag", t.residual, t.tolerance);

  const char* red_anchor = "constant map: φ-curvatures reduce to the classical ones";
  if (!s.has_tag("constant-map")) {
    rec.skip("classical_reduction", red_anchor, "map is not constant");
  } else if (m < 3) {
    rec.skip("classical_reduction", red_anchor, dim_note(m));
  } else if (o.jet_order < 4) {
    rec.skip("classical_reduction", red_anchor, "jet budget");
  } else {
    auto r = over_samples(s, o.parallel, [&](const std::vector<double>& p) -> Residuals {
      PhiBundle b = compute_phi(s.g, s.phi, s.alpha, p, 4, PhiOptions{false, false});
      oracle::Classical cl = oracle::classical_curvatures(s.g, p, 4);
      double d = std::max({max_abs_diff(values(b.ric_phi), cl.ric), max_abs_diff(values(b.schouten), cl.schouten),
                           max_abs_diff(values(b.cotton), cl.cotton), max_abs_diff(values(b.weyl), cl.weyl),
                           max_abs_diff(values(b.bach), cl.bach)});
      return {{"red", d}};
    });
    rec.value("classical_reduction", red_anchor, r["red"], 1e-11);
  }

  const int K = std::min(o.jet_order, 5);
  auto r = over_samples(s, o.parallel, [&](const std::vector<double>& p) -> Residuals {
    Residuals out;
    if (K >= 2) {
      PhiBundle b = compute_phi(s.g, s.phi, s.alpha, p, K, PhiOptions{true, K >= 5});
      IdentityResiduals ir = identity_residuals(b);
      out = {{"schur", ir.schur},           {"cotton_cyclic", ir.cotton_cyclic}, {"cotton_trace", ir.cotton_trace},
             {"weyl_trace", ir.weyl_trace}, {"weyl_div", ir.weyl_div},           {"cotton_div", ir.cotton_div},
             {"bach_sym", ir.bach_sym},     {"bach_trace", ir.bach_trace},       {"bach_routes", ir.bach_routes},
             {"div_bach", ir.div_bach},     {"div_bach_j", ir.div_bach_j}};
      auto he = harmonic_einstein_residual(b);
      out.push_back({"he_traceless", he.traceless_ricci});
      out.push_back({"he_tension", he.tension});
      out.push_back({"he_field", he.field});
    }
    if (K >= 5) {
      auto c = conservation_residuals(s.g, s.phi, p);
      out.push_back({"cons1", c.r1});
      out.push_back({"cons2", c.r2});
    }
    return out;
  });
  struct Item {
    const char* key;
    const char* check;
    const char* anchor;
    double tol;
  };
  const Item items[] = {
      {"schur", "schur", "generalized Schur identity", 1e-9},
      {"cotton_cyclic", "cotton_cyclic", "cyclic sum of the φ-Cotton tensor", 1e-9},
      {"cotton_trace", "cotton_trace", "trace of the φ-Cotton tensor", 1e-9},
      {"weyl_trace", "weyl_trace", "trace of the φ-Weyl tensor", 1e-9},
      {"weyl_div", "weyl_div", "divergence of the φ-Weyl tensor", 1e-9},
      {"cotton_div", "cotton_div", "divergence of the φ-Cotton tensor", 1e-9},
      {"bach_sym", "bach_symmetry", "symmetry of the φ-Bach tensor", 1e-9},
      {"bach_trace", "bach_trace", "trace of the φ-Bach tensor", 1e-9},
      {"bach_routes", "bach_two_routes", "φ-Bach by definition against the alternative form", 1e-9},
      {"div_bach", "bach_divergence", "divergence of the φ-Bach tensor (normalized by m−2)", 1e-7},
      {"div_bach_j", "bach_divergence_j", "m = 4: (m−2) div B = α⟨J, dφ⟩", 1e-7},
      {"cons1", "conservation_energy", "div T = ⟨τ, dφ⟩", 1e-9},
      {"cons2", "conservation_bienergy", "div T₂ = ⟨τ₂, dφ⟩", 1e-9},
  };
  for (const auto& it : items) {
    auto f = r.find(it.key);
    if (f == r.end()) rec.skip(it.check, it.anchor, "jet budget");
    else if (f->second < 0) rec.skip(it.check, it.anchor, m < 3 || std::string(it.key) == "div_bach_j" ? dim_note(m) : "jet budget");
    else rec.value(it.check, it.anchor, f->second, it.tol);
  }
  const char* he_anchor = "harmonic-Einstein: traceless φ-Ricci, tension, field equations";
  if (!s.has_tag("harmonic-einstein")) {
    rec.skip("harmonic_einstein", he_anchor, "scenario not tagged harmonic-einstein");
  } else {
    rec.value("harmonic_einstein", he_anchor, std::max({r["he_traceless"], r["he_tension"], r["he_field"]}), 1e-9);
  }
}

// ---- conformal

void conformal_suite(const Scenario& s, const SuiteOptions& o, Recorder& rec) {
  const int m = s.dim();
  Expr fe;
  ScalarField h = factor(s, o.seed, &fe);
  const int depth = std::min(4, o.jet_order);
  struct Law {
    const char* name;
    const char* anchor;
    double tol;
    int depth;
  };
  const Law laws[] = {
      {"riemann", "conformal change of the curvature tensor", 1e-8, 2},
      {"volume", "conformal change of the volume form", 1e-8, 2},
      {"dphi", "map differential in paired frames", 1e-8, 2},
      {"hessian_map", "second fundamental form of the map", 1e-8, 2},
      {"tension", "tension field under conformal change", 1e-8, 2},
      {"phi_ricci", "φ-Ricci tensor, frame components", 1e-8, 2},
      {"phi_ricci_global", "φ-Ricci tensor, global form", 1e-8, 2},
      {"phi_scalar", "φ-scalar curvature", 1e-8, 2},
      {"schouten", "φ-Schouten tensor", 1e-8, 2},
      {"weyl", "invariance of the φ-Weyl tensor", 1e-8, 2},
      {"cotton", "φ-Cotton tensor", 1e-8, 3},
      {"tension_derivative", "covariant derivative of the tension", 1e-8, 3},
      {"v_tensor", "the V tensor", 1e-7, 4},
      {"bach", "φ-Bach tensor", 1e-7, 4},
      {"bach_weighted_m4", "m = 4: weighted invariance of φ-Bach", 1e-7, 4},
  };
  std::map<std::string, double> r;
  if (depth >= 2)
    r = over_samples(s, o.parallel, [&](const std::vector<double>& p) {
      Residuals out = conformal_laws(s.g, s.phi, s.alpha, h, p, depth);
      if (m >= 3) out.push_back({"delta_f", delta_f_consistency(s.g, s.phi, s.alpha, h, p)});
      out.push_back({"composition", composition_residual(s.g, s.phi, s.alpha, fe, Expr(0.5) * fe, p)});
      if (m == 2) out.push_back({"surface", surface_density_residual(s.g, s.phi, s.alpha, h, p)});
      if (m == 4 && o.jet_order >= 4) {
        ScalarField f2;
        auto he = h.eval;
        f2.eval = [he](const CoordJets& x) { return he(x) * 2.0; };
        out.push_back({"q_density", q_density_residual(s.g, s.phi, s.alpha, f2, p)});
      }
      return out;
    });
  for (const auto& l : laws) {
    if (l.depth > depth) rec.skip(l.name, l.anchor, "jet budget");
    else if (!r.count(l.name)) rec.skip(l.name, l.anchor, dim_note(m));
    else rec.value(l.name, l.anchor, r[l.name], l.tol);
  }
  auto extra = [&](const char* key, const char* anchor, bool applies, const std::string& why) {
    if (!applies) rec.skip(key, anchor, why);
    else if (!r.count(key)) rec.skip(key, anchor, "jet budget");
    else rec.value(key, anchor, r[key], 1e-8);
  };
  extra("delta_f", "f-form against h-form of the φ-Ricci law", m >= 3, dim_note(m));
  extra("composition", "two successive changes against one combined change", true, "");
  extra("surface", "m = 2: change of the φ-scalar curvature density", m == 2, dim_note(m));
  extra("q_density", "m = 4: Q density changes by a divergence", m == 4, dim_note(m));
}

// ---- warped

void warped_suite(const Scenario& s, const SuiteOptions& o, Recorder& rec) {
  const int m = s.dim();
  const char* anchor = "warped-product block formulas";
  if (m + 1 > kMaxVars) {
    rec.skip("warped", anchor, "product dimension exceeds the jet variable limit");
    return;
  }
  if (o.jet_order < 4) {
    rec.skip("warped", anchor, "jet budget");
    return;
  }
  ScalarField u;
  std::string ustr = "1.5+0.3*sin(x1)";
  if (s.spec.fields.count("u")) ustr = s.spec.fields.at("u");
  u = ScalarField::from_expr(Expr::parse(ustr));
  Chart fiber = Chart::torus(1);
  for (const auto& [fname, sign] : {std::pair<const char*, double>{"riemannian_fibre", 1.0}, {"lorentzian_fibre", -1.0}}) {
    Eigen::MatrixXd gf(1, 1);
    gf(0, 0) = sign;
    if (sign < 0) fiber.n_pos = 0, fiber.n_neg = 1;
    else fiber.n_pos = 1, fiber.n_neg = 0;
    WarpedScenario ws;
    try {
      ws = build_warped(s.chart, s.g, s.phi, s.alpha, fiber, MetricField::constant(gf), u, s.samples);
    } catch (const std::exception& e) {
      rec.value(std::string("assembly/") + fname, anchor, INFINITY, 0.0, e.what());
      continue;
    }
    std::vector<std::vector<double>> P;
    for (const auto& p : s.samples) {
      auto q = p;
      q.push_back(0.7);
      P.push_back(q);
    }
    std::vector<WarpedBlocks> wb(P.size());
    std::vector<Residuals> lm(P.size());
    parallel_for(P.size(), o.parallel, [&](std::size_t i) {
      wb[i] = check_warped_all(ws, P[i]);
      lm[i] = check_lifted_map(ws, P[i]);
    });
    std::map<std::string, double> r;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < P.size(); ++i) {
      for (const auto& b : wb[i].reports) {
        if (!r.count(b.tensor)) order.push_back(b.tensor);
        r[b.tensor] = std::max(r[b.tensor], b.max());
      }
      if (!r.count("form_gap")) order.push_back("form_gap");
      r["form_gap"] = std::max(r["form_gap"], wb[i].form_gap);
      for (const auto& x : lm[i]) {
        if (!r.count(x.law)) order.push_back(x.law);
        r[x.law] = std::max(r[x.law], x.value);
      }
    }
    for (const auto& k : order) rec.value(k + "/" + fname, anchor, r[k], 1e-9, "u = " + ustr);
  }
}

// ---- variational

CheckRecord fd_record(const FunctionalReport& r, const std::string& suffix) {
  CheckRecord c;
  c.check = "fd:" + r.name + suffix;
  c.anchor = "first variation against its closed-form gradient pairing";
  const bool small = std::abs(r.fd) <= kBothSmall && std::abs(r.pairing) <= kBothSmall;
  if (small && r.rel_error > r.tol) {
    c.residual = std::max(std::abs(r.fd), std::abs(r.pairing));
    c.tolerance = kBothSmall;
    c.note = "both sides below the absolute floor";
  } else if (std::abs(r.pairing) <= kBothSmall && r.rel_error > r.tol) {
    // gradient orthogonal to the direction: the discrete functional still moves at the
    // quadrature-aliasing level, so compare absolutely as for critical points
    c.residual = std::abs(r.fd);
    c.tolerance = r.name.rfind("B/", 0) == 0 ? 1e-5 : 1e-6;
    c.note = "pairing vanishes, FD compared absolutely";
  } else {
    c.residual = r.rel_error;
    c.tolerance = r.tol;
  }
  c.status = c.residual <= c.tolerance ? Status::pass : Status::fail;
  return c;
}

void variational_suite(const Scenario& s, const SuiteOptions& o, Recorder& rec) {
  const int m = s.dim();
  const char* anchor = "functionals on a closed manifold";
  if (!s.closed()) return rec.skip("variational", anchor, "chart is not fully periodic");
  const int N = o.grid > 0 ? o.grid : s.spec.grid_nodes;
  if (N <= 0) return rec.skip("variational", anchor, "no quadrature grid configured");
  if (m < 3) return rec.skip("variational", anchor, dim_note(m));
  if (o.jet_order < 4) return rec.skip("variational", anchor, "jet budget");
  ClosedSetup cs = s.closed_setup(N, o.parallel);
  std::mt19937_64 rng(o.seed);

  auto f = functionals(cs);
  auto rel = [](double a, double b) { return relative_error(a, b); };
  rec.value("functional_split", "𝒮(g,φ) = 𝒮(g) − 2αE", rel(f.S, f.S_classical - 2 * s.alpha * f.E), 1e-10);
  rec.value("bach_functional_forms", "ℬ through S₂(A^φ) against the expanded integrand", rel(f.B, f.B_alt), 1e-11);
  {
    ClosedSetup sc = cs;
    auto ge = cs.g.eval;
    sc.g.eval = [ge](const CoordJets& x) {
      auto v = ge(x);
      for (auto& j : v) j *= 2.0;
      return v;
    };
    rec.value("rescaled_scale_invariance", "𝒮̄(λg) = 𝒮̄(g)", rel(functionals(sc).S_bar, f.S_bar), 1e-11);
  }

  const int n = s.phi.target->dim();
  const int kdir = N >= 16 ? 2 : 1;  // wavenumber 2 aliases on coarse grids
  const bool he = s.has_tag("harmonic-einstein");
  for (int d = 0; d < o.directions; ++d) {
    auto h = random_metric_direction(rng, s.chart, 0.3, kdir);
    auto v = random_map_direction(rng, s.chart, n, 0.3, kdir);
    const std::string sfx = "#" + std::to_string(d);
    for (const auto& r : variation_suite(cs, h, v)) {
      rec.out.push_back(fd_record(r, sfx));
      if (he && (r.name == "S_bar/metric" || r.name == "S_bar/map"))
        rec.value("critical:" + r.name + sfx, "harmonic-Einstein metrics are critical for 𝒮̄", std::abs(r.fd), 1e-6);
      if (he && (r.name == "B/metric" || r.name == "B/map"))
        rec.value("critical:" + r.name + sfx, "harmonic-Einstein metrics are critical for ℬ (m = 4)", std::abs(r.fd), 1e-5);
    }
  }

  {
    auto h = random_metric_direction(rng, s.chart, 0.3, kdir);
    auto v = random_map_direction(rng, s.chart, n, 0.3, kdir);
    auto r = over_samples(
        s, o.parallel,
        [&](const std::vector<double>& p) -> Residuals {
          auto fd = fd_directional([&](double t) {
            return compute_phi(perturb_metric(s.g, h, t), perturb_map(s.phi, v, t), s.alpha, p, 2, PhiOptions{false, false})
                .s_phi.value();
          });
          return {{"lin", relative_error(fd.value, linearized_phi_scalar(s.g, s.phi, s.alpha, h, v, p))}};
        },
        8);
    rec.value("linearized_phi_scalar", "linearization of the φ-scalar curvature against finite differences", r["lin"],
              1e-7, "first 8 samples");
    auto u = ScalarField::from_expr(Expr(1.0) + random_periodic(rng, s.chart, 0.3, kdir));
    auto d = adjoint_duality(cs, u, h, v);
    rec.pair("adjoint_duality", "∫u·d𝕊(h,v) = ∫⟨d𝕊*u, (h,v)⟩", d, 1e-7);
  }

  const char* yanchor = "φ-conformal Laplacian and the φ-Yamabe bounds";
  if (s.lorentzian()) {
    rec.skip("yamabe_lambda1", yanchor, "Riemannian metrics only");
    rec.skip("yamabe_rescaled_bound", yanchor, "Riemannian metrics only");
    rec.skip("yamabe_equation", yanchor, "Riemannian metrics only");
  } else {
    std::vector<std::vector<double>> pts(s.samples.begin(), s.samples.begin() + std::min<std::size_t>(8, s.samples.size()));
    ClosedSetup ys = cs;
    auto y = yamabe_bound_check(ys, o.yamabe_trials, o.seed + 1, pts);
    rec.value("yamabe_lambda1", "λ₁(L^φ) ≥ inf S^φ", std::max(0.0, y.inf_s - y.lambda1),
              1e-3 * std::max(1.0, std::abs(y.inf_s)), "lambda1 = " + std::to_string(y.lambda1));
    rec.value("yamabe_rescaled_bound", "𝒮̄(u^{4/(m−2)}g) ≥ min{0, λ₁}·vol^{2/m}", std::max(0.0, y.bound - y.min_sbar), y.tol,
              std::to_string(y.trials) + " trial factors");
    rec.value("yamabe_equation", "transformed φ-scalar curvature equation", y.equation_residual, 1e-7);
  }
  if (m == 4) rec.pair("q_integral_invariance", "∫Q is conformally invariant (m = 4)", q_integral_invariance(cs, factor(s, o.seed)), 1e-7);
  else rec.skip("q_integral_invariance", "∫Q is conformally invariant (m = 4)", dim_note(m));
}

}  // namespace

SuiteReport run_suite(const std::string& suite, const Scenario& s, const SuiteOptions& opt) {
  if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
    throw std::invalid_argument("unknown suite '" + suite + "'");
  auto t0 = std::chrono::steady_clock::now();
  SuiteReport rep;
  rep.suite = suite;
  rep.scenario = s.name();
  rep.jet_order = opt.jet_order;
  rep.grid = opt.grid > 0 ? opt.grid : s.spec.grid_nodes;
  rep.seed = opt.seed;
  rep.sample_seed = s.spec.sample_seed;
  rep.samples = static_cast<int>(s.samples.size());
  Recorder rec;
  if (suite == "curvature") curvature_suite(s, opt, rec);
  else if (suite == "phicurv") phicurv_suite(s, opt, rec);
  else if (suite == "conformal") conformal_suite(s, opt, rec);
  else if (suite == "warped") warped_suite(s, opt, rec);
  else variational_suite(s, opt, rec);
  rep.checks = std::move(rec.out);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::vector<SuiteReport> run_suites(const std::string& suite, const Scenario& s, const SuiteOptions& opt) {
  std::vector<SuiteReport> out;
  if (suite == "all")
    for (const auto& n : suite_names()) out.push_back(run_suite(n, s, opt));
  else
    out.push_back(run_suite(suite, s, opt));
  return out;
}

nlohmann::json report_json(const std::vector<SuiteReport>& reports, bool include_time) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks) {
      nlohmann::json j = {{"suite", r.suite},         {"scenario", r.scenario}, {"check", c.check},
                          {"anchor", c.anchor},       {"status", status_name(c.status)}};
      if (c.status == Status::skip) {
        j["residual"] = nullptr;
        j["tolerance"] = nullptr;
      } else {
        j["residual"] = std::isfinite(c.residual) ? nlohmann::json(c.residual) : nlohmann::json("inf");
        j["tolerance"] = c.tolerance;
      }
      if (!c.note.empty()) j["note"] = c.note;
      checks.push_back(j);
    }
    nlohmann::json e = {{"suite", r.suite},
                        {"scenario", r.scenario},
                        {"metadata",
                         {{"jet_order", r.jet_order},
                          {"grid", r.grid},
                          {"seed", r.seed},
                          {"sample_seed", r.sample_seed},
                          {"samples", r.samples}}},
                        {"summary",
                         {{"pass", r.count(Status::pass)}, {"fail", r.count(Status::fail)}, {"skip", r.count(Status::skip)}}},
                        {"checks", checks}};
    if (include_time) e["wall_time_s"] = r.wall_time;
    arr.push_back(e);
  }
  return {{"reports", arr}};
}

std::string report_csv(const std::vector<SuiteReport>& reports) {
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  std::ostringstream os;
  os.precision(17);
  os << "suite,scenario,check,anchor,residual,tolerance,status\n";
  for (const auto& r : reports)
    for (const auto& c : r.checks) {
      os << r.suite << ',' << r.scenario << ',' << quote(c.check) << ',' << quote(c.anchor) << ',';
      if (c.status == Status::skip) os << ",,";
      else os << c.residual << ',' << c.tolerance << ',';
      os << status_name(c.status) << '\n';
    }
  return os.str();
}

}  // namespace phg
