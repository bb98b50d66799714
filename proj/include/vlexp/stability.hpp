#pragma once

// Linear stability toolkit built around the scalar test equation
//   u' = ia u + lambda u,
// where ia is handled by the exponential part of a method and lambda by its
// explicit part.  Provides amplification factors, epsilon-relaxed stability
// scans and their CFL numbers y_max, the linearized 5-point upwind symbol,
// and the sigma stretching factor obtained from the angular scan of the
// stability-domain boundary.

#include <cmath>
#include <limits>
#include <numbers>
#include <string_view>
#include <vector>

#include "integrators.hpp"
#include "tableau.hpp"
#include "util.hpp"

namespace vlexp {

namespace detail {

// |R(z)|^2 - 1 for the classical stability polynomial, evaluated through the
// stage recursion in extended precision.  Near-tangent boundaries (the
// imaginary axis for two-stage methods) sit within double roundoff of zero,
// so the sign of the excess needs the extra head room.
inline double rk_excess_sq(const ButcherTableau& tb, cplx zd) {
  using lcplx = std::complex<long double>;
  const lcplx z(zd.real(), zd.imag());
  const int s = tb.stages();
  std::vector<lcplx> u(static_cast<std::size_t>(s));
  for (int l = 0; l < s; ++l) {
    lcplx acc = 1.0L;
    for (int j = 0; j < l; ++j)
      acc += z * static_cast<long double>(tb.a[l][j]) * u[j];
    u[l] = acc;
  }
  lcplx r = 1.0L;
  for (int j = 0; j < s; ++j) r += z * static_cast<long double>(tb.b[j]) * u[j];
  const long double m2 = r.real() * r.real() + r.imag() * r.imag();
  return static_cast<double>(m2 - 1.0L);
}

// Largest radius r in [0, r_cap] such that |R| <= 1 holds along r'*dir for
// all sampled r' <= r: dense march at r_step (so thin excluded slivers are
// not skipped), then bisection to tol.  Returns 0 when the very first probe
// is already outside, and throws if the boundary is never crossed.
inline double ray_crossing_radius(const ButcherTableau& tb, cplx dir, double r_cap,
                                  double r_step, double tol) {
  auto inside = [&](double r) { return rk_excess_sq(tb, r * dir) <= 1e-16; };
  double lo = 0.0, hi = -1.0;
  for (double r = r_step; r <= r_cap + 0.5 * r_step; r += r_step) {
    if (inside(r)) {
      lo = r;
    } else {
      hi = r;
      break;
    }
  }
  if (hi < 0.0)
    throw ValidationError("stability boundary not crossed along angle " +
                          std::to_string(std::arg(dir)) + " within radius " +
                          std::to_string(r_cap));
  if (lo == 0.0) return 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline cplx horner(const std::vector<cplx>& coeff, cplx z) {
  cplx r = coeff.back();
  for (std::size_t k = coeff.size() - 1; k-- > 0;) r = r * z + coeff[k];
  return r;
}

}  // namespace detail

// Complex one-step map of `integ` on u' = ia u + lambda u with dt = 1 and
// u0 = 1 (a and lambda are the dt-products directly).
inline cplx amplification_factor(Integrator& integ, double a_dt, cplx z) {
  DiagonalPropagator A(State{cplx(0.0, a_dt)});
  auto F = [z](double, const State& u, State& du) {
    du.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) du[i] = z * u[i];
  };
  State u{cplx(1.0)}, out;
  integ.step(A, F, 0.0, u, 1.0, out);
  return out[0];
}

// |amplification factor| of the named method at (a dt, z = lambda dt).
inline double amplification(std::string_view method, double a_dt, cplx z) {
  auto integ = make_integrator(method);
  return std::abs(amplification_factor(*integ, a_dt, z));
}

// The one-step map at fixed a dt is a polynomial of degree <= stages in
// z = lambda dt; recover its coefficients by evaluating at the roots of
// unity and applying the inverse discrete Fourier transform.
inline std::vector<cplx> amplification_polynomial(Integrator& integ, double a_dt) {
  const int n = integ.stages() + 1;
  std::vector<cplx> vals(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    const double ang = 2.0 * std::numbers::pi * m / n;
    vals[m] = amplification_factor(integ, a_dt, std::polar(1.0, ang));
  }
  std::vector<cplx> coeff(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (int m = 0; m < n; ++m)
      acc += vals[m] * std::polar(1.0, -2.0 * std::numbers::pi * k * m / n);
    coeff[k] = acc / static_cast<double>(n);
  }
  return coeff;
}

// Largest y >= 0 with |R(iy')| <= 1 for all 0 <= y' <= y.  By conjugate
// symmetry of real-coefficient polynomials this bounds the interval
// i(-y, y).  Returns 0 when the axis is excluded at scan resolution.
inline double ymax_lawson(const ButcherTableau& tb, double tol = 1e-9) {
  if (tol <= 0.0) throw ValidationError("ymax_lawson: tol must be positive");
  // The imaginary interval of an s-stage explicit method is contained in
  // i[-(s-1), s-1]; the cap is one stage beyond.
  const double cap = static_cast<double>(tb.stages());
  try {
    return detail::ray_crossing_radius(tb, cplx(0, 1), cap, 1e-3, tol);
  } catch (const ValidationError&) {
    return cap;  // unreachable for consistent tableaus; defensive only
  }
}

struct StabilityScan {
  std::vector<double> a_grid;   // the scanned a dt values
  std::vector<double> y_plus;   // upper extent of i(y_minus, y_plus) in D_eps
  std::vector<double> y_minus;  // lower extent (non-positive)
  std::vector<double> y_max;    // min(y_plus, |y_minus|)
};

struct YmaxExpResult {
  double y_max = 0.0;
  double argmin_a = 0.0;
  StabilityScan scan;
};

inline std::vector<double> default_a_grid(double a_max = 40.0, double a_step = 0.01) {
  std::vector<double> g;
  const int n = static_cast<int>(std::round(a_max / a_step));
  g.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) g.push_back(i * a_step);
  return g;
}

// Epsilon-relaxed CFL number: for each a dt on the grid, march the positive
// and negative imaginary half-axes in steps of y_step while the
// amplification stays below 1 + eps (plus a roundoff allowance), keeping the
// last passing grid value; the symmetric-interval bound per a is
// min(y_plus, |y_minus|), and the result is its minimum over the grid.
// Conjugate symmetry in a makes a non-negative grid sufficient.
inline YmaxExpResult ymax_exp(std::string_view method, double eps,
                              std::vector<double> a_grid = {}, double y_step = 1e-3,
                              double y_cap = 4.0) {
  if (eps < 0.0) throw ValidationError("ymax_exp: eps must be non-negative");
  if (a_grid.empty()) a_grid = default_a_grid();
  auto integ = make_integrator(method);
  const double thr = 1.0 + eps + 1e-12;

  YmaxExpResult res;
  res.y_max = y_cap;
  res.scan.a_grid = a_grid;
  for (double a : a_grid) {
    auto poly = amplification_polynomial(*integ, a);
    double extent[2];
    for (int s = 0; s < 2; ++s) {
      const double sign = (s == 0) ? 1.0 : -1.0;
      double last_ok = 0.0;
      for (double y = y_step; y <= y_cap + 0.5 * y_step; y += y_step) {
        if (std::abs(detail::horner(poly, cplx(0, sign * y))) > thr) break;
        last_ok = y;
      }
      extent[s] = last_ok;
    }
    const double ya = std::min(extent[0], extent[1]);
    res.scan.y_plus.push_back(extent[0]);
    res.scan.y_minus.push_back(-extent[1]);
    res.scan.y_max.push_back(ya);
    if (ya < res.y_max) {
      res.y_max = ya;
      res.argmin_a = a;
    }
  }
  return res;
}

// Fourier symbol factor of the linearized 5-point upwind reconstruction at
// angle theta (the symbol times dv); the full per-mode symbol is this
// divided by dv.
inline cplx lw5_bracket(double theta) {
  const cplx i(0, 1);
  return -std::exp(-3.0 * i * theta) / 30.0 + std::exp(-2.0 * i * theta) / 4.0 -
         std::exp(-i * theta) + cplx(1.0 / 3.0) + std::exp(i * theta) / 2.0 -
         std::exp(2.0 * i * theta) / 20.0;
}

// Per-mode symbol mu_m of the linearized 5-point upwind derivative.
inline cplx lw5_symbol(long m, double dv, double v_max) {
  if (dv <= 0.0) throw ValidationError("lw5_symbol: dv must be positive");
  const double theta = static_cast<double>(m) * std::numbers::pi * dv / v_max;
  return lw5_bracket(theta) / dv;
}

struct SigmaScan {
  double sigma = 0.0;
  double argmin_theta = 0.0;
  std::vector<double> theta;    // Fourier angles scanned
  std::vector<double> sigma_k;  // per-angle stretching factor
};

// Stretching factor sigma for a method applied to the linearized 5-point
// upwind advection: per Fourier angle, take the dv-normalized generator
// eigenvalue e(theta) = -lw5_bracket(theta), find the stability-boundary
// radius along its direction, and divide by |e|; sigma is the minimum over
// angles.  Angles cover (0, pi]; the conjugate half is symmetric.
inline SigmaScan sigma_lw5(const ButcherTableau& tb, int n_angles = 1024,
                           double boundary_resolution = 1e-3) {
  if (n_angles < 64) throw ValidationError("sigma_lw5: n_angles must be >= 64");
  SigmaScan out;
  out.sigma = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= n_angles; ++k) {
    const double theta = std::numbers::pi * k / n_angles;
    const cplx e = -lw5_bracket(theta);
    const double mod = std::abs(e);
    const double r =
        detail::ray_crossing_radius(tb, e / mod, 6.0, boundary_resolution, 1e-9);
    const double sk = r / mod;
    out.theta.push_back(theta);
    out.sigma_k.push_back(sk);
    if (sk < out.sigma) {
      out.sigma = sk;
      out.argmin_theta = theta;
    }
  }
  return out;
}

// Stability-domain boundary points along the given ray angles from the
// origin (radius via dense scan + bisection of |R| = 1).
inline std::vector<cplx> boundary_trace(const ButcherTableau& tb,
                                        const std::vector<double>& angles,
                                        double r_cap = 6.0, double r_step = 1e-3,
                                        double tol = 1e-9) {
  std::vector<cplx> pts;
  pts.reserve(angles.size());
  for (double ang : angles) {
    const cplx dir = std::polar(1.0, ang);
    pts.push_back(detail::ray_crossing_radius(tb, dir, r_cap, r_step, tol) * dir);
  }
  return pts;
}

}  // namespace vlexp
