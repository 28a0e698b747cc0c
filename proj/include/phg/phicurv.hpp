#pragma once
// φ-curvature tensors at a point, in coordinate components.
//   Ric^φ = Ric − α φ*η,  S^φ = tr Ric^φ,  A^φ = Ric^φ − S^φ/(2(m−1)) g
//   C_{ijk} = A_{ij,k} − A_{ik,j},  W^φ = Riem − (m−2)^{-1} A^φ ⊘ g
//   B^φ by its defining contraction and by the Laplacian-of-Ricci form, div B^φ, J.

#include <vector>

#include "phg/geometry.hpp"
#include "phg/phimap.hpp"

namespace phg {

struct PhiOptions {
  bool bach_alt = true;
  bool div_bach = true;
};

// With metric and map jets of order K: Ric^φ, A^φ, W^φ, T at order K−2;
// C^φ at K−3; B^φ, J at K−4; div B^φ at K−5. Objects beyond the budget stay empty.
struct PhiBundle {
  int m = 0, K = 0;
  double alpha = 0.0;
  Geometry geo;
  MapBundle map;
  JTensor ric_phi;
  Jet s_phi;
  JTensor schouten;
  JTensor stress;
  JTensor cotton;
  JTensor weyl;
  JTensor bach;
  JTensor bach_alt;
  JTensor div_bach;
  Section J;

  JTensor ric_phi_up;   // (R^φ)^{ij}
  JTensor ric_phi_mix;  // (R^φ)^i_j

  // ⟨φ^a_I, ψ^b_J⟩_η for two sections
  Jet dot(const Section& s, std::size_t is, const Section& t, std::size_t it) const {
    return target_dot(map, s, is, t, it);
  }
};

PhiBundle compute_phi(const MetricField& g, const MapField& phi, double alpha, const std::vector<double>& p, int K,
                      PhiOptions opt = {});

// Pieces exposed for verification.
JTensor bach_definition(const PhiBundle& b);
JTensor bach_alternative(const PhiBundle& b);
// Right side of the closed-form divergence of φ-Bach:
//   (m−4)/(m−2) (R^{jk}C_{jki} + α(⟨τ_i,τ⟩ + (R^φ)^j_i⟨φ_j,τ⟩)) + α⟨J, φ_i⟩
// It equals (m−2) div B^φ; see README.
JTensor div_bach_rhs(const PhiBundle& b, const Section& J);
// J^a with coupling c on the quadratic term c·2⟨τ,φ_j⟩φ^{aj}. The consistent choice is c = α.
Section j_tensor(const PhiBundle& b, double quadratic_coupling);

// Max-abs residuals of the internal identities; -1 marks "not computed" (jet budget or m).
struct IdentityResiduals {
  double schur = -1, cotton_cyclic = -1, cotton_trace = -1, weyl_trace = -1, weyl_div = -1;
  double cotton_div = -1, bach_sym = -1, bach_trace = -1, bach_routes = -1;
  double div_bach = -1;          // (m−2) div B − rhs with J(α)
  double div_bach_literal = -1;  // div B − rhs with the unit-coupled J
  double div_bach_j = -1;        // m=4 only: (m−2) div B_i − α⟨J,φ_i⟩
};
IdentityResiduals identity_residuals(const PhiBundle& b);

// ‖Ric̊^φ‖, ‖τ‖ and the Einstein-field residual with Λ = (m−2)S^φ/(2m)
struct HarmonicEinsteinResidual {
  double traceless_ricci = 0.0, tension = 0.0, field = 0.0;
};
HarmonicEinsteinResidual harmonic_einstein_residual(const PhiBundle& b);

}  // namespace phg
