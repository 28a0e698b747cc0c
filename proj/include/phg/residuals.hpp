#pragma once
// Named scalar residuals shared by the verification modules.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace phg {

struct NamedResidual {
  std::string law;
  double value = 0.0;
};
using Residuals = std::vector<NamedResidual>;

inline double max_residual(const Residuals& r) {
  double m = 0.0;
  for (const auto& x : r) m = std::max(m, x.value);
  return m;
}

// throws if absent
inline double find_residual(const Residuals& r, const std::string& law) {
  for (const auto& x : r)
    if (x.law == law) return x.value;
  throw std::out_of_range("no residual named " + law);
}

}  // namespace phg
