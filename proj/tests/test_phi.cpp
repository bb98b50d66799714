#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "vlexp/phi.hpp"

using namespace vlexp;
using Catch::Matchers::WithinAbs;

TEST_CASE("phi values at zero and simple closed forms", "[phi]") {
  CHECK(phi_function(0, 0.0) == cplx(1.0));
  CHECK(phi_function(1, 0.0) == cplx(1.0));
  CHECK(phi_function(2, 0.0) == cplx(0.5));
  CHECK_THAT(phi_function(3, 0.0).real(), WithinAbs(1.0 / 6.0, 1e-16));

  // (e^{i pi} - 1)/(i pi) = 2i/pi
  cplx v = phi_function(1, cplx(0, std::numbers::pi));
  CHECK_THAT(v.real(), WithinAbs(0.0, 1e-15));
  CHECK_THAT(v.imag(), WithinAbs(2.0 / std::numbers::pi, 1e-15));

  CHECK_THAT(phi_function(1, 1.0).real(), WithinAbs(std::exp(1.0) - 1.0, 1e-14));

  CHECK_THROWS_AS(phi_function(-1, 1.0), ValidationError);
  CHECK_THROWS_AS(phi_function(5, 1.0), ValidationError);
}

TEST_CASE("recurrence holds across the sampled annulus", "[phi]") {
  const double fact[4] = {1, 1, 2, 6};
  for (double r : {1e-2, 3e-2, 0.1, 0.5, 1.0, 3.0, 10.0})
    for (int k = 0; k < 16; ++k) {
      double ang = 2 * std::numbers::pi * k / 16;
      cplx z = std::polar(r, ang);
      for (int l = 0; l <= 3; ++l) {
        cplx lhs = phi_function(l + 1, z);
        cplx rhs = (phi_function(l, z) - 1.0 / fact[l]) / z;
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
      }
    }
}

TEST_CASE("series branch is consistent with exp identities", "[phi]") {
  // phi_1(z) z + 1 = e^z and phi_{l+1} z + 1/l! = phi_l exercise the Taylor
  // branch against independently computed exponentials.
  for (double r : {1e-8, 1e-5, 1e-3, 9e-3})
    for (int k = 0; k < 8; ++k) {
      cplx z = std::polar(r, 2 * std::numbers::pi * k / 8);
      CHECK(std::abs(phi_function(1, z) * z + 1.0 - std::exp(z)) < 1e-15);
      CHECK(std::abs(phi_function(2, z) * z + 1.0 - phi_function(1, z)) < 1e-15);
      CHECK(std::abs(phi_function(3, z) * z + 0.5 - phi_function(2, z)) < 1e-15);
    }
}

TEST_CASE("branch seam is continuous", "[phi]") {
  // The recurrence branch divides by z once per order, so rounding in exp(z)
  // grows by |z|^{-1} = 1e2 per level at the switch radius.  The offset is
  // kept tiny so the function's own variation stays below the tolerances.
  const double tol[] = {1e-12, 1e-12, 1e-11, 1e-9, 1e-7};
  for (int l = 0; l <= 4; ++l)
    for (int k = 0; k < 8; ++k) {
      double ang = 2 * std::numbers::pi * k / 8;
      cplx lo = phi_function(l, std::polar(1e-2 - 1e-13, ang));
      cplx hi = phi_function(l, std::polar(1e-2 + 1e-13, ang));
      CHECK(std::abs(lo - hi) < tol[l]);
    }
}
