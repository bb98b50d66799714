#pragma once

// Velocity-space differencing on a single column (fixed spatial point):
// second-order centered derivative and fifth-order WENO upwind interface
// values with field-sign splitting.  Columns are passed with ghost cells
// already filled by the caller's boundary policy (zero for the kinetic
// solver, equilibrium values for the direct drift-kinetic formulation):
// fpad has n + 6 entries and fpad[3 + j] addresses node j for j in [-3, n+2].

#include <cmath>
#include <vector>

#include "util.hpp"

namespace vlexp {

// Velocity grid with half-open node placement v_j = -v_max + j dv.
struct VGrid {
  int n = 0;
  double v_max = 0.0;
  double dv = 0.0;

  VGrid() = default;
  VGrid(int n_, double v_max_) : n(n_), v_max(v_max_), dv(2.0 * v_max_ / n_) {
    if (n_ < 3 || v_max_ <= 0.0)
      throw ValidationError("VGrid: need at least 3 nodes and v_max > 0");
  }
  double node(int j) const { return -v_max + j * dv; }
};

struct WenoWeights {
  static constexpr double eps_w = 1e-6;
  static constexpr double gamma[3] = {1.0 / 10.0, 6.0 / 10.0, 3.0 / 10.0};
  double beta[3]{};
  double alpha[3]{};
  double w[3]{};
};

// Normalized weights from the three smoothness indicators:
// alpha_i = gamma_i / (eps_w + beta_i)^2, w_i = alpha_i / sum(alpha).
inline WenoWeights weno_weights(double b0, double b1, double b2) {
  WenoWeights W;
  W.beta[0] = b0;
  W.beta[1] = b1;
  W.beta[2] = b2;
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = WenoWeights::eps_w + W.beta[i];
    W.alpha[i] = WenoWeights::gamma[i] / (d * d);
    sum += W.alpha[i];
  }
  for (int i = 0; i < 3; ++i) W.w[i] = W.alpha[i] / sum;
  return W;
}

// Centered second-order derivative, out_j = (f_{j+1} - f_{j-1}) / (2 dv).
inline void cd2_dv(const double* fpad, int n, double dv, double* out) {
  const double inv = 1.0 / (2.0 * dv);
  for (int j = 0; j < n; ++j) out[j] = (fpad[3 + j + 1] - fpad[3 + j - 1]) * inv;
}

// WENO5 interface values for one sign.  Writes n + 1 values covering the
// interfaces j + 1/2 for j = -1..n-1 (out[j + 1] is the value at j + 1/2).
// sign = +1 selects the left-biased reconstruction f^+, sign = -1 the
// mirrored right-biased f^-.  frozen_weights forces w_i = gamma_i, yielding
// the linearized scheme whose Fourier symbol the stability module analyzes.
inline void weno5_flux(const double* fpad, int n, int sign, double* out,
                       bool frozen_weights = false) {
  if (sign != 1 && sign != -1) throw ValidationError("weno5_flux: sign must be +-1");
  for (int j = -1; j < n; ++j) {
    const double* f = fpad + 3 + j;  // f[m] = f_{j+m}
    double s0, s1, s2, b0, b1, b2;
    if (sign > 0) {
      s0 = (2.0 * f[-2] - 7.0 * f[-1] + 11.0 * f[0]) / 6.0;
      s1 = (-f[-1] + 5.0 * f[0] + 2.0 * f[1]) / 6.0;
      s2 = (2.0 * f[0] + 5.0 * f[1] - f[2]) / 6.0;
      const double c0 = f[-2] - 2.0 * f[-1] + f[0], d0 = f[-2] - 4.0 * f[-1] + 3.0 * f[0];
      const double c1 = f[-1] - 2.0 * f[0] + f[1], d1 = f[-1] - f[1];
      const double c2 = f[0] - 2.0 * f[1] + f[2], d2 = 3.0 * f[0] - 4.0 * f[1] + f[2];
      b0 = 13.0 / 12.0 * c0 * c0 + 0.25 * d0 * d0;
      b1 = 13.0 / 12.0 * c1 * c1 + 0.25 * d1 * d1;
      b2 = 13.0 / 12.0 * c2 * c2 + 0.25 * d2 * d2;
    } else {
      s0 = (11.0 * f[1] - 7.0 * f[2] + 2.0 * f[3]) / 6.0;
      s1 = (2.0 * f[0] + 5.0 * f[1] - f[2]) / 6.0;
      s2 = (-f[-1] + 5.0 * f[0] + 2.0 * f[1]) / 6.0;
      const double c0 = f[1] - 2.0 * f[2] + f[3], d0 = 3.0 * f[1] - 4.0 * f[2] + f[3];
      const double c1 = f[0] - 2.0 * f[1] + f[2], d1 = f[0] - f[2];
      const double c2 = f[-1] - 2.0 * f[0] + f[1], d2 = f[-1] - 4.0 * f[0] + 3.0 * f[1];
      b0 = 13.0 / 12.0 * c0 * c0 + 0.25 * d0 * d0;
      b1 = 13.0 / 12.0 * c1 * c1 + 0.25 * d1 * d1;
      b2 = 13.0 / 12.0 * c2 * c2 + 0.25 * d2 * d2;
    }
    double w0, w1, w2;
    if (frozen_weights) {
      w0 = WenoWeights::gamma[0];
      w1 = WenoWeights::gamma[1];
      w2 = WenoWeights::gamma[2];
    } else {
      const WenoWeights W = weno_weights(b0, b1, b2);
      w0 = W.w[0];
      w1 = W.w[1];
      w2 = W.w[2];
    }
    out[j + 1] = w0 * s0 + w1 * s1 + w2 * s2;
  }
}

// Upwind advection term E * df/dv via sign-split interface values:
// out_j = (E^+ (f^+_{j+1/2} - f^+_{j-1/2}) + E^- (f^-_{j+1/2} - f^-_{j-1/2})) / dv
// with E^+ = max(E, 0), E^- = min(E, 0).  flux_ws must hold n + 1 doubles.
inline void v_transport_term(const double* fpad, int n, double E, double dv,
                             double* out, double* flux_ws,
                             bool frozen_weights = false) {
  const double ep = std::max(E, 0.0), em = std::min(E, 0.0);
  for (int j = 0; j < n; ++j) out[j] = 0.0;
  if (ep != 0.0 || E == 0.0) {
    weno5_flux(fpad, n, +1, flux_ws, frozen_weights);
    const double s = ep / dv;
    for (int j = 0; j < n; ++j) out[j] += s * (flux_ws[j + 1] - flux_ws[j]);
  }
  if (em != 0.0) {
    weno5_flux(fpad, n, -1, flux_ws, frozen_weights);
    const double s = em / dv;
    for (int j = 0; j < n; ++j) out[j] += s * (flux_ws[j + 1] - flux_ws[j]);
  }
}

}  // namespace vlexp
