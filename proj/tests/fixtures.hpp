#pragma once
// Small randomized metric/map builders shared by the unit tests.

#include <random>
#include <string>
#include <vector>

#include "phg/expr.hpp"
#include "phg/geometry.hpp"
#include "phg/phimap.hpp"

namespace fx {

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(%.17g)", v);
  return buf;
}

// trigonometric bump in x1..xm with wavenumbers in {0,1,2}
inline std::string trig(std::mt19937_64& rng, int m, double amp) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> k(0, 2);
  std::string s;
  for (int term = 0; term < 2; ++term) {
    std::string arg = num(u(rng) * 3.0);
    for (int i = 0; i < m; ++i) {
      int w = k(rng);
      if (w) arg += "+" + std::to_string(w) + "*x" + std::to_string(i + 1);
    }
    s += (term ? "+" : "") + num(amp * u(rng)) + "*" + (term ? "cos(" : "sin(") + arg + ")";
  }
  return s;
}

inline phg::MetricField random_metric(std::mt19937_64& rng, int m, double amp = 0.15, int n_neg = 0) {
  std::vector<phg::Expr> c(m * m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      std::string s = trig(rng, m, i == j ? amp : 0.5 * amp);
      if (i == j) s = (i < n_neg ? "-1+" : "1+") + s;
      c[i * m + j] = c[j * m + i] = phg::Expr::parse(s);
    }
  return phg::MetricField::from_exprs(m, c);
}

inline phg::MapField random_map(std::mt19937_64& rng, int m, std::shared_ptr<const phg::TargetGeometry> tgt,
                                double amp = 0.3) {
  std::vector<phg::Expr> c;
  for (int a = 0; a < tgt->dim(); ++a) {
    std::string s = (a < m ? "x" + std::to_string(a + 1) + "+" : std::string("0.2+")) + trig(rng, m, amp);
    if (!tgt->is_flat()) s = "0.3*(" + s + ")";
    c.push_back(phg::Expr::parse(s));
  }
  return phg::MapField::from_exprs(m, tgt, c);
}

inline std::vector<double> random_point(std::mt19937_64& rng, int m) {
  std::uniform_real_distribution<double> u(0.0, 6.283185307179586);
  std::vector<double> p(m);
  for (auto& x : p) x = u(rng);
  return p;
}

}  // namespace fx
