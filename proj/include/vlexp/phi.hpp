#pragma once

#include <cmath>
#include <complex>

#include "vlexp/util.hpp"

namespace vlexp {

// phi_0 = exp and phi_{l+1}(z) = (phi_l(z) - 1/l!)/z, the entire functions
// exponential integrators are built from.  The recurrence cancels near z = 0,
// so below |z| = 1e-2 a 12-term Taylor series is used instead.
inline cplx phi_function(int l, cplx z) {
  if (l < 0) throw ValidationError("phi_function: order must be >= 0");
  static const double fact[16] = {1.,
                                  1.,
                                  2.,
                                  6.,
                                  24.,
                                  120.,
                                  720.,
                                  5040.,
                                  40320.,
                                  362880.,
                                  3628800.,
                                  39916800.,
                                  479001600.,
                                  6227020800.,
                                  87178291200.,
                                  1307674368000.};
  if (l > 4) throw ValidationError("phi_function: orders above 4 unsupported");
  if (std::abs(z) < 1e-2) {
    cplx acc = 0.0, zp = 1.0;
    for (int k = 0; k < 12; ++k) {
      acc += zp / fact[k + l];
      zp *= z;
    }
    return acc;
  }
  cplx p = std::exp(z);
  for (int k = 0; k < l; ++k) p = (p - 1.0 / fact[k]) / z;
  return p;
}

}  // namespace vlexp
