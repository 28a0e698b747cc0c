#pragma once
// Named scenarios: chart, metric, map, target, α, quadrature grid, sample
// points and tags. Everything is declared through expression strings, so a
// scenario serialises to a JSON config and loads back to the same fields.
// Tags are checked when a scenario is assembled.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "phg/geometry.hpp"
#include "phg/phimap.hpp"
#include "phg/variational.hpp"

namespace phg {

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diag_; }

 private:
  std::vector<std::string> diag_;
};

struct TargetSpec {
  int dim = 1;
  std::string kind = "flat";  // flat, round_sphere, custom
  std::vector<std::string> metric;  // custom only, n*n in y1..yn
};

struct ScenarioSpec {
  std::string name, description;
  int dim = 0;
  std::vector<int> signature;  // optional {n_pos, n_neg}
  std::vector<double> lo, periods;
  std::vector<bool> periodic;  // empty means all periodic
  std::vector<std::string> metric;  // dim*dim, row-major
  TargetSpec target;
  std::vector<std::string> map;
  double alpha = 1.0;
  int grid_nodes = 0;  // 0: no default quadrature
  std::uint64_t sample_seed = 1;
  std::map<std::string, std::string> fields;  // auxiliary scalars, e.g. "f" (conformal factor), "u"
  std::map<std::string, double> recorded;     // e.g. "S_phi"
  std::vector<std::string> tags;
};

struct TagCheck {
  std::string tag;
  double residual = 0.0, tolerance = 0.0;
  bool pass = false;
};

constexpr int kSampleCount = 64;
constexpr double kTagTolerance = 1e-9;

struct Scenario {
  ScenarioSpec spec;
  Chart chart;
  MetricField g;
  MapField phi;
  double alpha = 1.0;
  std::vector<std::vector<double>> samples;
  std::map<std::string, ScalarField> fields;
  std::vector<TagCheck> tag_checks;

  const std::string& name() const { return spec.name; }
  int dim() const { return spec.dim; }
  bool has_tag(const std::string& t) const;
  bool lorentzian() const { return chart.n_neg > 0; }
  bool closed() const { return chart.fully_periodic(); }
  ClosedSetup closed_setup(int nodes = 0, int threads = 1) const;  // nodes 0: the scenario default
};

// Tags with a construction check. Anything else is rejected.
const std::vector<std::string>& known_tags();

// Validates, draws the samples and runs the tag checks; a failed tag check
// is a consistency error.
Scenario assemble(const ScenarioSpec& spec);

const std::vector<ScenarioSpec>& builtin_specs();
std::vector<std::string> builtin_names();
Scenario builtin(const std::string& name);  // throws ScenarioError on an unknown name

nlohmann::json to_json(const ScenarioSpec& spec);
ScenarioSpec spec_from_json(const nlohmann::json& j);  // field-level diagnostics
Scenario load_config(const std::string& path);
void save_config(const ScenarioSpec& spec, const std::string& path);

// Halton points (bases 2, 3, 5, ...) with a seeded Cranley–Patterson shift.
// Periodic axes cover the period; bounded axes keep a 5% margin.
std::vector<std::vector<double>> halton_samples(const Chart& chart, int count, std::uint64_t seed);

}  // namespace phg
