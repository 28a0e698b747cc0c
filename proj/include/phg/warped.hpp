#pragma once
// Warped products M ×_u F: ḡ = g + u² g_F on the product chart (base
// coordinates first), with the lifted map φ̄ = φ∘π_M. A Lorentzian fibre is
// just a fibre metric with negative entries, e.g. g_F = −dt².
//
// Block checks compare curvature computed directly from ḡ against the block
// formulas in the product frame ē_i = e_i, ē_{m+α} = ε_α / u.

#include <string>
#include <vector>

#include "phg/geometry.hpp"
#include "phg/phicurv.hpp"
#include "phg/phimap.hpp"
#include "phg/residuals.hpp"

namespace phg {

class WarpedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// below this the product metric is treated as degenerate
constexpr double kWarpMargin = 1e-3;

struct WarpedScenario {
  int m = 0, d = 0;
  Chart base_chart, fiber_chart, chart;
  MetricField base, fiber, product;
  MapField phi, lifted;
  double alpha = 0.0;
  ScalarField u;  // warping function on the base

  double u_at(const std::vector<double>& P) const;  // P is a product point
  std::vector<double> base_point(const std::vector<double>& P) const;
  std::vector<double> fiber_point(const std::vector<double>& P) const;
};

// Throws WarpedError if u < kWarpMargin at any of the given base samples.
WarpedScenario build_warped(const Chart& base_chart, const MetricField& g, const MapField& phi, double alpha,
                            const Chart& fiber_chart, const MetricField& g_F, const ScalarField& u,
                            const std::vector<std::vector<double>>& base_samples = {});

// Same, with u = e^{−f/d}.
WarpedScenario build_warped_f(const Chart& base_chart, const MetricField& g, const MapField& phi, double alpha,
                              const Chart& fiber_chart, const MetricField& g_F, const ScalarField& f,
                              const std::vector<std::vector<double>>& base_samples = {});

// Max-abs frame residual per block. Scalars go in base_base.
struct BlockReport {
  std::string tensor;
  double base_base = 0.0, mixed = 0.0, fiber_fiber = 0.0;
  double max() const;
};

enum class WarpForm { u, f };

BlockReport check_warped_riemann(const WarpedScenario& ws, const std::vector<double>& P);
BlockReport check_warped_ricci(const WarpedScenario& ws, const std::vector<double>& P, WarpForm form = WarpForm::u);
BlockReport check_warped_phi_ricci(const WarpedScenario& ws, const std::vector<double>& P,
                                   WarpForm form = WarpForm::u);
// reports "scalar" and "phi_scalar"
std::vector<BlockReport> check_warped_scalar(const WarpedScenario& ws, const std::vector<double>& P,
                                             WarpForm form = WarpForm::u);

// Everything above in one pass, plus the u-form against f-form gap of each display.
struct WarpedBlocks {
  std::vector<BlockReport> reports;
  double form_gap = 0.0;
  double max() const;
};
WarpedBlocks check_warped_all(const WarpedScenario& ws, const std::vector<double>& P);

// fiber_dphi, energy, tension_u, tension_f, tension_forms
Residuals check_lifted_map(const WarpedScenario& ws, const std::vector<double>& P);

// Base side: base_system, base_tension, fiber_einstein, fiber_scalar, constraint.
// Product side: product_ricci, product_tension. λ is the φ̄-scalar curvature of
// the product and Λ the fibre scalar curvature.
Residuals harmonic_einstein_warped_check(const WarpedScenario& ws, double lambda, double Lambda,
                                         const std::vector<double>& P);
double base_side_defect(const Residuals& r);
double product_side_defect(const Residuals& r);

// φ-static system on (M, g) with u = e^{−f}:
// system, tension, laplacian, eigen (−Δu − λu/(m+1)), scalar (S^φ − (m−1)λ/(m+1)).
Residuals phi_static_check(const MetricField& g, const MapField& phi, double alpha, const ScalarField& f,
                           double lambda, const std::vector<double>& p);

}  // namespace phg
