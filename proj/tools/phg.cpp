// phg: run verification suites on scenarios, convert reports, inspect the registry.
// Exit codes: 0 all checks pass, 1 some check fails, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "phg/phicurv.hpp"
#include "phg/suites.hpp"

namespace {

constexpr int kOk = 0, kFail = 1, kUsage = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

std::string render(const std::vector<phg::SuiteReport>& reps, const std::string& format, bool with_time) {
  if (format == "csv") return phg::report_csv(reps);
  return phg::report_json(reps, with_time).dump(2) + "\n";
}

void print_table(const phg::SuiteReport& r, std::ostream& os) {
  char line[512];
  os << "== " << r.suite << " on " << r.scenario << " (" << r.count(phg::Status::pass) << " pass, "
     << r.count(phg::Status::fail) << " fail, " << r.count(phg::Status::skip) << " skip, ";
  std::snprintf(line, sizeof line, "%.1fs)\n", r.wall_time);
  os << line;
  for (const auto& c : r.checks) {
    if (c.status == phg::Status::skip)
      std::snprintf(line, sizeof line, "  %-4s  %-34s  %-10s  %-10s  %s\n", phg::status_name(c.status), c.check.c_str(),
                    "-", "-", c.note.c_str());
    else
      std::snprintf(line, sizeof line, "  %-4s  %-34s  %-10.3e  %-10.1e  %s\n", phg::status_name(c.status),
                    c.check.c_str(), c.residual, c.tolerance, c.note.c_str());
    os << line;
  }
}

std::vector<phg::Scenario> resolve(const std::string& name, const std::string& config) {
  std::vector<phg::Scenario> out;
  if (!config.empty()) {
    out.push_back(phg::load_config(config));
  } else if (name == "registry") {
    for (const auto& n : phg::builtin_names()) out.push_back(phg::builtin(n));
  } else if (!name.empty()) {
    out.push_back(phg::builtin(name));
  } else {
    throw ConfigError("give --scenario NAME (or 'registry') or --config PATH");
  }
  return out;
}

void show(const phg::Scenario& s, std::ostream& os) {
  os << "name:        " << s.name() << "\n";
  if (!s.spec.description.empty()) os << "description: " << s.spec.description << "\n";
  os << "dim:         " << s.dim() << "  signature (" << s.chart.n_pos << "," << s.chart.n_neg << ")\n";
  os << "chart:       ";
  for (int i = 0; i < s.dim(); ++i)
    os << (i ? " x " : "") << "[" << s.chart.lo[i] << ", " << s.chart.hi[i] << "]" << (s.chart.periodic[i] ? "p" : "");
  os << "\nmetric:\n";
  for (int i = 0; i < s.dim(); ++i) {
    os << "  ";
    for (int j = 0; j < s.dim(); ++j) os << (j ? " | " : "") << s.spec.metric[i * s.dim() + j];
    os << "\n";
  }
  os << "target:      " << s.spec.target.kind << ", dim " << s.spec.target.dim << "\n";
  os << "map:         ";
  for (std::size_t a = 0; a < s.spec.map.size(); ++a) os << (a ? ", " : "") << s.spec.map[a];
  os << "\nalpha:       " << s.alpha << "\n";
  os << "grid:        " << (s.spec.grid_nodes ? std::to_string(s.spec.grid_nodes) + " nodes per axis" : "none") << "\n";
  for (const auto& [k, v] : s.spec.fields) os << "field " << k << ":     " << v << "\n";
  for (const auto& [k, v] : s.spec.recorded) os << "recorded " << k << ": " << v << "\n";
  os << "tags:\n";
  for (const auto& t : s.tag_checks) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-20s residual %.2e (tol %.0e) %s\n", t.tag.c_str(), t.residual, t.tolerance,
                  t.pass ? "PASS" : "FAIL");
    os << line;
  }
  // sample-point diagnostics
  double dmin = INFINITY, dmax = 0, smin = INFINITY, smax = -INFINITY;
  for (const auto& p : s.samples) {
    const double d = std::abs(phg::to_matrix(s.g.value_at(p)).determinant());
    dmin = std::min(dmin, d), dmax = std::max(dmax, d);
    const double sp = phg::compute_phi(s.g, s.phi, s.alpha, p, 2, phg::PhiOptions{false, false}).s_phi.value();
    smin = std::min(smin, sp), smax = std::max(smax, sp);
  }
  char line[256];
  std::snprintf(line, sizeof line, "samples:     %zu Halton points, seed %llu\n", s.samples.size(),
                static_cast<unsigned long long>(s.spec.sample_seed));
  os << line;
  std::snprintf(line, sizeof line, "  |det g| in [%.4g, %.4g], S^phi in [%.6g, %.6g]\n", dmin, dmax, smin, smax);
  os << line;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phg: numerical checks for phi-curvatures of maps between (pseudo-)Riemannian manifolds"};
  app.require_subcommand(1);

  std::string suite = "all", scenario, config, format = "json", out, input;
  phg::SuiteOptions opt;
  bool quiet = false;

  auto* verify = app.add_subcommand("verify", "run a suite on a scenario");
  verify->add_option("--suite", suite, "curvature, phicurv, conformal, warped, variational or all")
      ->check(CLI::IsMember({"curvature", "phicurv", "conformal", "warped", "variational", "all"}));
  verify->add_option("--scenario", scenario, "builtin scenario name, or 'registry' for every builtin");
  verify->add_option("--config", config, "scenario config file (JSON)");
  verify->add_option("--jet-order", opt.jet_order, "jet order budget")->check(CLI::Range(1, phg::kMaxOrder));
  verify->add_option("--grid", opt.grid, "quadrature nodes per axis (0: scenario default)")->check(CLI::Range(0, 64));
  verify->add_option("--seed", opt.seed, "seed for random directions and factors");
  verify->add_option("--directions", opt.directions, "random first-variation directions")->check(CLI::Range(0, 100));
  verify->add_option("--trials", opt.yamabe_trials, "random conformal factors for the Yamabe bound")->check(CLI::Range(0, 1000));
  verify->add_option("--parallel", opt.parallel, "worker threads")->check(CLI::Range(1, 256));
  verify->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
  verify->add_option("--out", out, "write the report here");
  verify->add_flag("--quiet", quiet, "no table on stdout");

  auto* report = app.add_subcommand("report", "re-emit a saved JSON report as JSON or CSV");
  report->add_option("--input", input, "JSON report written by verify")->required();
  report->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  report->add_option("--out", out, "output path (stdout if omitted)");

  auto* scen = app.add_subcommand("scenarios", "inspect the scenario registry");
  scen->require_subcommand(1);
  auto* list = scen->add_subcommand("list", "names and tags");
  std::string show_name, export_name;
  auto* showc = scen->add_subcommand("show", "fields, tag checks and sample diagnostics");
  showc->add_option("name", show_name)->required();
  auto* exportc = scen->add_subcommand("export", "write a builtin as a config file");
  exportc->add_option("name", export_name)->required();
  exportc->add_option("--out", out, "output path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*verify) {
      std::vector<phg::SuiteReport> reps;
      for (const auto& s : resolve(scenario, config))
        for (auto& r : phg::run_suites(suite, s, opt)) {
          if (!quiet) print_table(r, std::cout);
          reps.push_back(std::move(r));
        }
      if (!out.empty() && !write_file(out, render(reps, format, true))) {
        std::cerr << "error: cannot write '" << out << "'\n";
        return kUsage;
      }
      bool ok = true;
      for (const auto& r : reps) ok = ok && r.all_pass();
      if (!quiet) std::cout << (ok ? "ALL PASS" : "SOME CHECKS FAILED") << "\n";
      return ok ? kOk : kFail;
    }
    if (*report) {
      std::ifstream in(input);
      if (!in) throw ConfigError("cannot read '" + input + "'");
      nlohmann::json j = nlohmann::json::parse(in);
      std::string text;
      if (format == "json") {
        text = j.dump(2) + "\n";
      } else {
        std::ostringstream os;
        os.precision(17);
        os << "suite,scenario,check,anchor,residual,tolerance,status\n";
        for (const auto& r : j.at("reports"))
          for (const auto& c : r.at("checks")) {
            auto num = [](const nlohmann::json& v) {
              if (v.is_null()) return std::string();
              if (v.is_string()) return v.get<std::string>();
              std::ostringstream s;
              s.precision(17);
              s << v.get<double>();
              return s.str();
            };
            auto quote = [](std::string s) {
              std::string q = "\"";
              for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
              return q + "\"";
            };
            os << c.at("suite").get<std::string>() << ',' << c.at("scenario").get<std::string>() << ','
               << quote(c.at("check").get<std::string>()) << ',' << quote(c.at("anchor").get<std::string>()) << ','
               << num(c.at("residual")) << ',' << num(c.at("tolerance")) << ',' << c.at("status").get<std::string>()
               << '\n';
          }
        text = os.str();
      }
      if (out.empty()) std::cout << text;
      else if (!write_file(out, text)) throw ConfigError("cannot write '" + out + "'");
      return kOk;
    }
    if (*list) {
      for (const auto& s : phg::builtin_specs()) {
        std::string tags;
        for (const auto& t : s.tags) tags += (tags.empty() ? "" : ",") + t;
        std::printf("%-24s m=%d  %-40s %s\n", s.name.c_str(), s.dim, tags.c_str(), s.description.c_str());
      }
      return kOk;
    }
    if (*showc) {
      show(phg::builtin(show_name), std::cout);
      return kOk;
    }
    if (*exportc) {
      const std::string text = phg::to_json(phg::builtin(export_name).spec).dump(2) + "\n";
      if (out.empty()) std::cout << text;
      else if (!write_file(out, text)) throw ConfigError("cannot write '" + out + "'");
      return kOk;
    }
  } catch (const phg::ScenarioError& e) {
    std::cerr << "configuration error:\n";
    for (const auto& d : e.diagnostics()) std::cerr << "  " << d << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed report: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
