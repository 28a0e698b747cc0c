#pragma once
// Functionals on closed manifolds (fully periodic charts) and the checks of
// their first variations: finite differences in t of F(g + th, φ) and F(g, φ_t)
// against the closed-form gradient pairings, the adjoint of the linearised
// φ-scalar curvature, and the φ-conformal Laplacian bounds.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "phg/geometry.hpp"
#include "phg/phicurv.hpp"
#include "phg/phimap.hpp"
#include "phg/residuals.hpp"

namespace phg {

class VariationalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Trapezoid rule with N nodes per periodic axis.
struct QuadratureGrid {
  int dim = 0, N = 0;
  std::vector<double> lo, step;
  double weight = 0.0;  // product of steps

  std::size_t size() const;
  std::vector<double> node(std::size_t i) const;
  double total_weight() const { return weight * static_cast<double>(size()); }
};

QuadratureGrid make_grid(const Chart& chart, int N);  // throws on a non-periodic axis

struct ClosedSetup {
  Chart chart;
  MetricField g;
  MapField phi;
  double alpha = 1.0;
  QuadratureGrid grid;
  int threads = 1;
};

// Σ w · density(x) · √|det g(x)|
double integrate(const ClosedSetup& s, const std::function<double(const std::vector<double>&)>& density);
// Σ w · f(x), f already a density against dx
double integrate_dx(const QuadratureGrid& grid, int threads, const std::function<double(const std::vector<double>&)>& f);

struct FunctionalValues {
  double vol = 0;
  double S = 0;          // ∫S^φ μ
  double S_classical = 0;  // ∫S μ
  double S_bar = 0;      // vol^{−(m−2)/m} 𝒮
  double E = 0, E2 = 0;  // ½∫|dφ|², ½∫|τ|²
  double S2 = 0;         // ∫S₂(A^φ) from the eigenvalues of g⁻¹A^φ
  double B = 0;          // ∫(S₂(A^φ) − α e₂)
  double B_alt = 0;      // ∫(m/(8(m−1)) S² − ½|Ric^φ|² − α/2 |τ|²)
};

FunctionalValues functionals(const MetricField& g, const MapField& phi, double alpha, const QuadratureGrid& grid,
                             int threads = 1);
inline FunctionalValues functionals(const ClosedSetup& s) { return functionals(s.g, s.phi, s.alpha, s.grid, s.threads); }

// second elementary symmetric function of the eigenvalues of g⁻¹A
double s2_eigenvalues(const DTensor& A, const DTensor& g);

// Target-valued direction v^a(x) in target coordinates.
struct VectorField {
  int n = 0;
  std::function<std::vector<Jet>(const CoordJets&)> eval;
  static VectorField from_exprs(std::vector<Expr> comps);
};

MetricField perturb_metric(const MetricField& g, const MetricField& h, double t);
// Flat or custom targets move along coordinate lines; the round sphere moves
// along great circles, φ_t = exp_φ(t v).
MapField perturb_map(const MapField& phi, const VectorField& v, double t);

// Band-limited random directions: sums of sin/cos with integer wavenumbers ≤ kmax,
// with argument 2π(x − lo)/period per axis.
MetricField random_metric_direction(std::mt19937_64& rng, const Chart& chart, double amp, int kmax = 2);
VectorField random_map_direction(std::mt19937_64& rng, const Chart& chart, int n, double amp, int kmax = 2);
Expr random_periodic(std::mt19937_64& rng, const Chart& chart, double amp, int kmax = 2, int terms = 3);

struct FdDerivative {
  double value = 0.0, error = 0.0;
  bool monotone = true;
  std::vector<double> central;  // plain central differences per step
};
// Central differences at the given decreasing steps, then Richardson on the h² series.
FdDerivative fd_directional(const std::function<double(double)>& F,
                            const std::vector<double>& steps = {1e-2, 5e-3, 2.5e-3});
// Vector version: F returns many functionals at once, evaluated at the same t.
std::vector<FdDerivative> fd_directional_many(const std::function<std::vector<double>(double)>& F,
                                              const std::vector<double>& steps = {1e-2, 5e-3, 2.5e-3});

struct FunctionalReport {
  std::string name;       // e.g. "E/metric"
  double fd = 0.0, pairing = 0.0, rel_error = 0.0, fd_error = 0.0;
  bool monotone = true;
  double tol = 0.0;
  bool pass = false;
};

constexpr double kRelFloor = 1e-12;
constexpr double kBothSmall = 1e-8;  // FD and pairing both below this count as agreement
double relative_error(double a, double b);

// Metric direction h and map direction v; ℬ entries only when m = 4 and with_bach.
std::vector<FunctionalReport> variation_suite(const ClosedSetup& s, const MetricField& h, const VectorField& v,
                                              bool with_bach = true);

// (d𝕊)(h, v) = −Δ tr h + div div h − ⟨h, Ric^φ⟩ − 2α⟨φ_i, v_i⟩ at a point
double linearized_phi_scalar(const MetricField& g, const MapField& phi, double alpha, const MetricField& h,
                             const VectorField& v, const std::vector<double>& p);

struct AdjointValue {
  DTensor first;                // Hess u − u Ric^φ − Δu g (coordinates)
  std::vector<double> second;   // 2α(uτ + dφ(∇u)) (target coordinates)
};
AdjointValue scalar_map_adjoint(const MetricField& g, const MapField& phi, double alpha, const ScalarField& u,
                                const std::vector<double>& p);

struct DualityResult {
  double lhs = 0.0, rhs = 0.0, rel = 0.0;
};
// ∫ u (d𝕊)(h,v) μ against ∫ [⟨(d𝕊)*u₁, h⟩ + ((d𝕊)*u₂, v)] μ
DualityResult adjoint_duality(const ClosedSetup& s, const ScalarField& u, const MetricField& h, const VectorField& v);

// Frame max-abs of Hess u − u Ric^φ − Δu g ("metric") and max |uτ + dφ(∇u)| ("map").
Residuals kernel_system_residual(const MetricField& g, const MapField& phi, double alpha, const ScalarField& u,
                                 const std::vector<double>& p);

// L^φ u = −4(m−1)/(m−2) Δu + S^φ u at a point
double conformal_laplacian(const MetricField& g, const MapField& phi, double alpha, const ScalarField& u,
                           const std::vector<double>& p);

// λ₁(L^φ) by minimising the Rayleigh quotient over the span of products of
// 1, cos(kθ), sin(kθ), k ≤ kmax (Galerkin); `shift` is added to S^φ.
struct Lambda1 {
  double value = 0.0;
  int basis = 0;
  double inf_s = 0.0;  // min of S^φ over the grid nodes
};
Lambda1 lambda1(const ClosedSetup& s, int kmax = 2, double shift = 0.0);

// 4(m−1)/(m−2) Δu − S^φ u + S̃^φ u^{(m+2)/(m−2)} with S̃^φ computed on u^{4/(m−2)} g
double yamabe_equation_residual(const MetricField& g, const MapField& phi, double alpha, const ScalarField& u,
                                const std::vector<double>& p);
MetricField yamabe_metric(const MetricField& g, const ScalarField& u);  // u^{4/(m−2)} g

struct YamabeReport {
  double lambda1 = 0.0, inf_s = 0.0;
  double min_sbar = 0.0;        // smallest 𝒮̄ over the trials
  double bound = 0.0;           // min{0, λ₁}
  double equation_residual = 0.0;
  double tol = 0.0;
  int trials = 0;
  bool lambda_ok = false, sbar_ok = false, equation_ok = false;
  bool pass() const { return lambda_ok && sbar_ok && equation_ok; }
};
YamabeReport yamabe_bound_check(const ClosedSetup& s, int trials, std::uint64_t seed,
                                const std::vector<std::vector<double>>& samples);

// ∫Q over the grid (m = 4); invariance compares g and e^{−f} g
double q_integral(const ClosedSetup& s);
DualityResult q_integral_invariance(const ClosedSetup& s, const ScalarField& f);

}  // namespace phg
