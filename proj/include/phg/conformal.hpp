#pragma once
// Conformal change g̃ = e^{−2h} g. Every transformation law is checked by
// computing both sides independently: tilde objects directly on the field g̃,
// plain objects on g, then comparing in paired orthonormal frames ẽ_i = e^h e_i
// (or as coordinate tensors where the law is global).

#include <string>
#include <vector>

#include "phg/geometry.hpp"
#include "phg/phicurv.hpp"
#include "phg/phimap.hpp"
#include "phg/residuals.hpp"

namespace phg {

MetricField conformal_metric(const MetricField& g, const ScalarField& h);

// Laws up to depth: 2 (Riemann, volume, dφ, ∇dφ, τ, Ric^φ, S^φ, Schouten, Weyl),
// 3 (+ ∇τ, Cotton), 4 (+ V, Bach, and the m=4 weighted invariance).
Residuals conformal_laws(const MetricField& g, const MapField& phi, double alpha, const ScalarField& h,
                         const std::vector<double>& p, int depth);

// Δ_f f read as Δf − |∇f|²: the f-form of the φ-Ricci law against the h-form.
double delta_f_consistency(const MetricField& g, const MapField& phi, double alpha, const ScalarField& h,
                           const std::vector<double>& p);

// Change by h1 then h2 against change by h1 + h2, compared on Ric^φ.
double composition_residual(const MetricField& g, const MapField& phi, double alpha, const Expr& h1, const Expr& h2,
                            const std::vector<double>& p);

// m = 2: S̃^φ μ̃ − S^φ μ − 2Δh μ, as a density against coordinates.
double surface_density_residual(const MetricField& g, const MapField& phi, double alpha, const ScalarField& h,
                                const std::vector<double>& p);

// Conformally harmonic-Einstein system for g with factor f (g̃ = e^{−2f/(m−2)} g):
// ‖(Ric^φ + Hess f + df⊗df/(m−2))°‖, ‖τ − dφ(∇f)‖, and the same defects recomputed on g̃.
struct ConformalHE {
  double traceless = 0.0, tension = 0.0;
  double direct_traceless = 0.0, direct_tension = 0.0;
};
ConformalHE conformally_harmonic_einstein(const MetricField& g, const MapField& phi, double alpha,
                                          const ScalarField& f, const std::vector<double>& p);

// m = 4 densities against dx: Q_g = (S²/3 − |Ric^φ|² − α|τ|²)√|g|, and the residual
// Q_{g̃} − Q_g − div_g(P_g(f))√|g| with g̃ = e^{−f} g.
double q_density(const PhiBundle& b);
double q_density_residual(const MetricField& g, const MapField& phi, double alpha, const ScalarField& f,
                          const std::vector<double>& p);

}  // namespace phg
