#pragma once
// Calculus of a map φ: (M, g) → (N, η). Target-valued objects carry the target
// index first: s[a] is a source tensor for every target component a. The
// pullback connection is ∇_μ s^a = ∂_μ s^a + ^NΓ^a_{bc}(φ) ∂_μφ^b s^c, combined
// with Levi-Civita on source slots.

#include <memory>
#include <string>
#include <vector>

#include "phg/expr.hpp"
#include "phg/geometry.hpp"

namespace phg {

// Riemannian target given by metric expressions in y1..yn; Christoffels and
// curvature come from symbolic derivatives evaluated through the map's jets.
enum class TargetKind { flat, round_sphere, custom };

class TargetGeometry {
 public:
  static std::shared_ptr<const TargetGeometry> flat(int n);
  static std::shared_ptr<const TargetGeometry> round_sphere(int n);  // stereographic chart, unit radius
  static std::shared_ptr<const TargetGeometry> from_metric(int n, const std::vector<Expr>& eta);

  int dim() const { return n_; }
  bool is_flat() const { return flat_; }
  TargetKind kind() const { return kind_; }
  const std::vector<Expr>& metric_exprs() const { return eta_; }

  struct Local {
    JTensor eta;      // η_ab(φ)
    JTensor gamma;    // ^NΓ^a_{bc}(φ), empty when flat
    JTensor riem_up;  // ^NR^a_{bcd}(φ), empty when flat or not requested
  };
  Local eval(const std::vector<Jet>& y, bool curvature) const;
  DTensor metric_at(const std::vector<double>& y) const;

 private:
  static std::shared_ptr<const TargetGeometry> build(int n, const std::vector<Expr>& eta, TargetKind kind);
  int n_ = 0;
  bool flat_ = false;
  TargetKind kind_ = TargetKind::custom;
  std::vector<Expr> eta_;    // n*n
  std::vector<Expr> deta_;   // [c][a][b] = ∂_c η_ab
  std::vector<Expr> ddeta_;  // [c][d][a][b] = ∂_c ∂_d η_ab
};

struct MapField {
  int src_dim = 0;
  std::shared_ptr<const TargetGeometry> target;
  std::function<std::vector<Jet>(const CoordJets&)> eval;

  static MapField from_exprs(int src_dim, std::shared_ptr<const TargetGeometry> target, std::vector<Expr> comps);
  std::vector<double> value_at(const std::vector<double>& p) const;
};

using Section = std::vector<JTensor>;  // s[a], source tensors indexed by target component

// Pullback-bundle calculus of φ at a point. With map jets of order K:
// dφ order K−1, ∇dφ and τ order K−2, ∇τ order K−3, ∇∇τ and τ₂ order K−4.
struct MapBundle {
  int m = 0, n = 0, K = 0;
  std::vector<Jet> phi;
  TargetGeometry::Local target;
  Section dphi;   // φ^a_μ
  Section ddphi;  // φ^a_{μν}
  Section tau;    // rank-0 sections τ^a
  Section dtau;   // τ^a_μ
  Section ddtau;  // τ^a_{μν}
  Section tau2;   // τ₂^a
  JTensor pullback;  // (φ*η)_{μν}
  Jet energy;        // e = ½|dφ|²

  bool has_tau() const { return !tau.empty(); }
  bool has_dtau() const { return !dtau.empty(); }
  bool has_tau2() const { return !tau2.empty(); }
};

MapBundle compute_map_bundle(const MapField& phi, const Geometry& geo, const std::vector<double>& p, int K);

// Pullback-connection covariant derivative of a target-valued tensor.
Section pullback_derivative(const Section& s, const Geometry& geo, const MapBundle& mb);

// η_ab(φ) s^a t^b for rank-0 sections, and η_ab s^a_{I} t^b_{J} contractions.
Jet target_dot(const MapBundle& mb, const Section& s, std::size_t is, const Section& t, std::size_t it);

// stress-energy T = φ*η − ½|dφ|² g and the bi-energy tensor T₂
JTensor stress_energy(const Geometry& geo, const MapBundle& mb);
JTensor stress_energy_2(const Geometry& geo, const MapBundle& mb);

// divergence of a symmetric 2-tensor: g^{νκ} ∇_κ T_{μν}
JTensor divergence2(const JTensor& T, const Geometry& geo);

struct ConservationResiduals {
  double r1 = 0.0, r2 = 0.0;
};
ConservationResiduals conservation_residuals(const MetricField& g, const MapField& phi, const std::vector<double>& p);

}  // namespace phg
