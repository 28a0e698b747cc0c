#pragma once
// Charts, metric fields and the Levi-Civita curvature engine in coordinate
// components. Curvature conventions:
//   R^r_{smn} = ∂_m Γ^r_{ns} − ∂_n Γ^r_{ms} + Γ^r_{ml} Γ^l_{ns} − Γ^r_{nl} Γ^l_{ms}
//   R_{rsmn}  = g_{rl} R^l_{smn},   Ric_{sn} = R^m_{smn},   S = g^{sn} Ric_{sn}
// Covariant derivatives append the derivative index as the last slot.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phg/expr.hpp"
#include "phg/tensor.hpp"

namespace phg {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kDegenerateDet = 1e-10;

struct Chart {
  int dim = 0;
  std::vector<double> lo, hi;
  std::vector<bool> periodic;
  int n_pos = 0, n_neg = 0;  // signature

  static Chart torus(int m, double period = 2.0 * 3.14159265358979323846);
  static Chart box(int m, double lo, double hi);

  double period(int i) const { return hi[i] - lo[i]; }
  bool fully_periodic() const;
  bool contains(const std::vector<double>& p) const;
  void validate() const;
};

using CoordJets = std::vector<Jet>;
CoordJets coord_jets(const std::vector<double>& p, int K);

// Symmetric matrix field g_{μν}(x), evaluated through jets (row-major m*m).
struct MetricField {
  int dim = 0;
  std::function<std::vector<Jet>(const CoordJets&)> eval;

  static MetricField from_exprs(int dim, std::vector<Expr> comps);  // m*m, row-major
  static MetricField constant(const Eigen::MatrixXd& g);
  DTensor value_at(const std::vector<double>& p) const;
};

// Scalar field through jets.
struct ScalarField {
  std::function<Jet(const CoordJets&)> eval;
  static ScalarField from_expr(Expr e);
  double value_at(const std::vector<double>& p) const;
};

struct MetricJets {
  int m = 0, K = 0;
  JTensor g, ginv;
  Jet det, vol;  // det g and sqrt|det g|
};

MetricJets metric_at(const MetricField& g, const std::vector<double>& p, int K);

// Levi-Civita data at a point. With metric jets of order K: Γ has order K−1,
// curvature order K−2.
struct Geometry {
  int m = 0, K = 0;
  MetricJets metric;
  JTensor gamma;    // gamma(k, i, j) = Γ^k_{ij}
  JTensor riem_up;  // R^r_{smn}
  JTensor riem;     // R_{rsmn}
  JTensor ric;
  Jet scalar;
  bool has_curvature() const { return !riem.empty(); }
  const JTensor& g() const { return metric.g; }
  const JTensor& ginv() const { return metric.ginv; }
};

Geometry compute_geometry(const MetricField& g, const std::vector<double>& p, int K, bool curvature = true);

JTensor christoffel(const MetricJets& mj);
void invert_jet_matrix(const JTensor& a, JTensor& inv, Jet& det);
void curvature_from_christoffel(Geometry& geo);

// ∇T with the derivative index appended last; contravariant slots follow T.upper().
JTensor covariant_derivative(const JTensor& T, const JTensor& gamma);
JTensor covariant_derivative(const Jet& f, int m);  // gradient of a scalar

// Index gymnastics on jets.
JTensor raise_first(const JTensor& T, const JTensor& ginv);
Jet trace2(const JTensor& T, const JTensor& ginv);  // g^{ij} T_{ij}
Jet inner2(const JTensor& A, const JTensor& B, const JTensor& ginv);  // g^{ik} g^{jl} A_ij B_kl
JTensor kulkarni_nomizu(const JTensor& T, const JTensor& V);

struct Frame {
  int m = 0;
  Eigen::MatrixXd e;      // row i holds e_i^μ
  Eigen::MatrixXd theta;  // row i holds θ^i_μ; theta = e^{-T}
  std::vector<double> eta;
  Frame scaled(double s) const;  // e_i -> s e_i (paired frames under conformal change)
};

Frame orthonormal_frame(const DTensor& g);
DTensor frame_components(const DTensor& T, const Frame& F);

struct BianchiResiduals {
  double first = 0.0, second = 0.0;
};
BianchiResiduals bianchi_residuals(const MetricField& g, const std::vector<double>& p);

// Residuals of the algebraic Riemann symmetries (antisymmetry in each pair, pair exchange).
double riemann_symmetry_residual(const DTensor& R);

Eigen::MatrixXd to_matrix(const DTensor& t2);
DTensor from_matrix(const Eigen::MatrixXd& m);

}  // namespace phg
