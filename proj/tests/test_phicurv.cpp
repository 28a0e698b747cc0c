#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "phg/phicurv.hpp"

using namespace phg;

TEST_CASE("phi-curvature identities on random scenarios") {
  std::mt19937_64 rng(7);
  for (int m : {3, 4, 5}) {
    for (int rep = 0; rep < 3; ++rep) {
      auto g = fx::random_metric(rng, m, 0.12, rep == 2 ? 1 : 0);
      auto tgt = rep == 1 ? TargetGeometry::round_sphere(2) : TargetGeometry::flat(3);
      auto phi = fx::random_map(rng, m, tgt);
      auto p = fx::random_point(rng, m);
      PhiBundle b = compute_phi(g, phi, 0.7, p, 5);
      IdentityResiduals r = identity_residuals(b);
      CAPTURE(m);
      CAPTURE(rep);
      CHECK(r.schur < 1e-9);
      CHECK(r.cotton_cyclic < 1e-9);
      CHECK(r.cotton_trace < 1e-9);
      CHECK(r.weyl_trace < 1e-9);
      CHECK(r.weyl_div < 1e-9);
      CHECK(r.cotton_div < 1e-9);
      CHECK(r.bach_sym < 1e-9);
      CHECK(r.bach_trace < 1e-9);
      CHECK(r.bach_routes < 1e-9);
      CHECK(r.div_bach < 1e-7);
      if (m == 4) CHECK(r.div_bach_j < 1e-7);
      // the unit-coupled literal display does not close
      CHECK(r.div_bach_literal > 1e-4);
    }
  }
}
