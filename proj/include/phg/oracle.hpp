#pragma once
// Independent checks: Richardson-extrapolated finite differences, the
// constant-curvature closed form, and a classical curvature path built from
// Christoffel symbols of the first kind (no raised Riemann, no φ terms).

#include <functional>
#include <random>
#include <vector>

#include "phg/expr.hpp"
#include "phg/geometry.hpp"

namespace phg::oracle {

using ScalarFn = std::function<double(const std::vector<double>&)>;

struct FdResult {
  double value = 0.0;
  double error = 0.0;  // |R2 − R1| at the finest level
};

// Central-difference partial ∂^γ f(p), |γ| ≤ 3, steps h, h/2, h/4, two Richardson levels.
FdResult fd_partial(const ScalarFn& f, const std::vector<double>& p, const MultiIndex& gamma, double h = 1e-2);

// Random smooth expression in x1..xm of nesting depth ≤ depth. log, sqrt and
// division only see arguments bounded away from their singular set.
Expr random_expression(std::mt19937_64& rng, int m, int depth);

// Max relative disagreement between jet-extracted partials of e (order ≤ 3) and fd_partial,
// taking the base step among 2e-2 .. 2.5e-3 with the smallest Richardson error estimate.
double jet_vs_fd(const Expr& e, const std::vector<double>& p, int order = 3);

// K (g_{μκ}g_{ντ} − g_{μτ}g_{νκ})
DTensor constant_curvature_riemann(const DTensor& g, double K);

struct Classical {
  DTensor riem, ric, schouten, weyl;
  double scalar = 0.0;
  DTensor cotton;  // needs order 3
  DTensor bach;    // needs order 4
};

// Classical curvature tower at p; depth 2 (Riem..Weyl), 3 (+Cotton), 4 (+Bach).
Classical classical_curvatures(const MetricField& g, const std::vector<double>& p, int depth);

}  // namespace phg::oracle
