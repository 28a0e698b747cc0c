#pragma once
// Verification suites over a scenario. Each check reports a residual against
// a pinned tolerance; status is FAIL iff the residual exceeds it, SKIP when
// the check does not apply (dimension, signature, jet budget, no quadrature).

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "phg/scenarios.hpp"

namespace phg {

enum class Status { pass, fail, skip };
const char* status_name(Status s);

struct CheckRecord {
  std::string check;
  std::string anchor;  // the identity or law being checked, in words
  double residual = 0.0, tolerance = 0.0;
  Status status = Status::skip;
  std::string note;
};

struct SuiteOptions {
  int jet_order = kMaxOrder;  // budget; checks needing more are skipped
  int grid = 0;               // nodes per axis, 0 for the scenario default
  std::uint64_t seed = 1;     // random directions, factors and trial functions
  int parallel = 1;
  int directions = 1;         // random (h, v) pairs for the first-variation checks
  int yamabe_trials = 4;
};

struct SuiteReport {
  std::string suite, scenario;
  int jet_order = 0, grid = 0, samples = 0;
  std::uint64_t seed = 0, sample_seed = 0;
  double wall_time = 0.0;  // seconds, excluded from determinism comparisons
  std::vector<CheckRecord> checks;

  bool all_pass() const;  // no FAIL
  int count(Status s) const;
};

const std::vector<std::string>& suite_names();  // curvature, phicurv, conformal, warped, variational

// Throws std::invalid_argument on an unknown suite.
SuiteReport run_suite(const std::string& suite, const Scenario& s, const SuiteOptions& opt);
// "all" expands to every suite in order.
std::vector<SuiteReport> run_suites(const std::string& suite, const Scenario& s, const SuiteOptions& opt);

// include_time = false drops wall time so two runs compare byte for byte.
nlohmann::json report_json(const std::vector<SuiteReport>& reports, bool include_time = true);
std::string report_csv(const std::vector<SuiteReport>& reports);

}  // namespace phg
