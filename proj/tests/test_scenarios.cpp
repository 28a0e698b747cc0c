#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "phg/phicurv.hpp"
#include "phg/scenarios.hpp"

using namespace phg;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("phg_" + name + ".json")).string();
}

bool has_diag(const ScenarioError& e, const std::string& needle) {
  for (const auto& d : e.diagnostics())
    if (d.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("every builtin passes its tag checks") {
  for (const auto& name : builtin_names()) {
    INFO(name);
    Scenario s = builtin(name);
    CHECK(s.samples.size() == kSampleCount);
    for (const auto& p : s.samples) CHECK(s.chart.contains(p));
    for (const auto& t : s.tag_checks) {
      INFO(t.tag, " residual ", t.residual);
      CHECK(t.pass);
    }
    CHECK(s.tag_checks.size() >= s.spec.tags.size());
  }
  CHECK_THROWS_AS(builtin("no-such-scenario"), ScenarioError);
}

TEST_CASE("registry examples") {
  Scenario f = builtin("flat-t4-const");
  CHECK(f.dim() == 4);
  CHECK(f.has_tag("flat"));
  CHECK(f.has_tag("phi-ricci-flat"));
  CHECK(f.alpha == 1.0);
  CHECK(f.closed());

  Scenario s3 = builtin("sphere3-identity");
  CHECK(s3.has_tag("harmonic-einstein"));
  // S^φ = m(m − 1 − α) for the identity of the unit sphere
  for (int k = 0; k < 5; ++k)
    CHECK(compute_phi(s3.g, s3.phi, s3.alpha, s3.samples[k], 2).s_phi.value() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s3.spec.recorded.at("S_phi") == 3.0);

  Scenario t = builtin("t4-perturbed-torusmap");
  CHECK(t.has_tag("generic"));
  CHECK(t.spec.target.dim == 2);
  CHECK(t.closed_setup().grid.N == 8);

  Scenario mk = builtin("minkowski4-chunk");
  CHECK(mk.lorentzian());
  CHECK(mk.chart.n_neg == 1);
  CHECK_THROWS_AS(mk.closed_setup(), ScenarioError);
}

TEST_CASE("samples are deterministic and seeded") {
  Chart c = Chart::torus(3);
  auto a = halton_samples(c, 64, 5), b = halton_samples(c, 64, 5), d = halton_samples(c, 64, 6);
  CHECK(a == b);
  CHECK(a != d);
  Chart box = Chart::box(2, -1, 1);
  for (const auto& p : halton_samples(box, 64, 1))
    for (double x : p) CHECK(std::abs(x) <= 0.9 + 1e-15);
}

TEST_CASE("config round trip") {
  for (const auto& name : builtin_names()) {
    INFO(name);
    Scenario s = builtin(name);
    const std::string path = temp_path(name);
    save_config(s.spec, path);
    Scenario r = load_config(path);
    std::remove(path.c_str());
    CHECK(r.name() == s.name());
    CHECK(r.spec.tags == s.spec.tags);
    CHECK(r.chart.n_neg == s.chart.n_neg);
    double d = 0;
    for (const auto& p : s.samples) {
      CHECK(p == r.samples[&p - &s.samples[0]]);
      d = std::max(d, max_abs_diff(s.g.value_at(p), r.g.value_at(p)));
      auto a = s.phi.value_at(p), b = r.phi.value_at(p);
      for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    }
    CHECK(d <= 1e-15);
  }
}

TEST_CASE("config diagnostics") {
  ScenarioSpec base = builtin("flat-t4-const").spec;

  SUBCASE("non-symmetric metric") {
    ScenarioSpec s = base;
    s.metric[1] = "0.1*sin(x1)";
    try {
      assemble(s);
      FAIL("accepted a non-symmetric metric");
    } catch (const ScenarioError& e) {
      CHECK(has_diag(e, "metric[0][1] and metric[1][0]: not symmetric"));
    }
  }
  SUBCASE("Lorentzian torus records its signature") {
    ScenarioSpec s = base;
    s.metric[0] = "-1";
    s.signature.clear();
    s.tags = {"lorentzian"};
    Scenario sc = assemble(s);
    CHECK(sc.chart.n_pos == 3);
    CHECK(sc.chart.n_neg == 1);
    CHECK(sc.spec.signature == std::vector<int>{3, 1});
    s.signature = {4, 0};
    CHECK_THROWS_AS(assemble(s), ScenarioError);
  }
  SUBCASE("field-level errors") {
    ScenarioSpec s = base;
    s.metric[5] = "sin(x1";
    s.map = {"x7"};
    try {
      assemble(s);
      FAIL("accepted bad expressions");
    } catch (const ScenarioError& e) {
      CHECK(has_diag(e, "metric[1][1]"));
      CHECK(has_diag(e, "offset 7"));
      CHECK(has_diag(e, "map[0]"));
    }
    ScenarioSpec t = base;
    t.tags = {"sphere"};
    CHECK_THROWS_AS(assemble(t), ScenarioError);  // a tag that does not hold
    t.tags = {"bogus"};
    CHECK_THROWS_AS(assemble(t), ScenarioError);
    t = base;
    t.metric[0] = "0";
    CHECK_THROWS_AS(assemble(t), ScenarioError);  // degenerate
  }
  SUBCASE("schema violations") {
    auto j = to_json(base);
    j.erase("alpha");
    j["map"] = 3;
    try {
      spec_from_json(j);
      FAIL("accepted a broken document");
    } catch (const ScenarioError& e) {
      CHECK(has_diag(e, "alpha: missing"));
      CHECK(has_diag(e, "map: wrong type"));
    }
    CHECK_THROWS_AS(load_config("/nonexistent/dir/x.json"), ScenarioError);
  }
}
