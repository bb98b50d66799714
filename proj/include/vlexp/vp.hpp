#pragma once

// 1D1V Vlasov-Poisson solver:
//
//   df/dt + v df/dx + E(f) dE/dv = 0,   dE/dx = rho - 1,  rho = integral f dv
//
// discretised with Fourier modes in x and either CD2 or WENO5 in v.  The
// state is the x-Fourier transform fhat[k][j] (k slowest, velocity node j
// contiguous).  The stiff x-advection -i v_j k fhat is the diagonal linear
// part handled exactly by the exponential/Lawson steppers; the electric-field
// advection is the explicit nonlinearity, evaluated in real space.
//
// Also houses the constant-coefficient transport experiment
// df/dt + d df/dx + b df/dv = 0 with a discontinuous-disc initial condition,
// used to probe the relaxed stability bound of the exponential integrators.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "fft.hpp"
#include "integrators.hpp"
#include "propagator.hpp"
#include "spectral.hpp"
#include "stability.hpp"
#include "util.hpp"
#include "vadv.hpp"

namespace vlexp {

enum class VScheme { cd2, weno5 };

inline VScheme vscheme_from_name(const std::string& s) {
  if (s == "cd2") return VScheme::cd2;
  if (s == "weno5") return VScheme::weno5;
  throw ValidationError("unknown velocity scheme '" + s + "' (expected cd2 or weno5)");
}

inline const char* to_string(VScheme s) { return s == VScheme::cd2 ? "cd2" : "weno5"; }

struct VPGrid {
  int nx = 0;
  double Lx = 0;
  VGrid v;
  std::vector<double> kx;  // signed wavenumbers 2 pi m / Lx (Nyquist zeroed)

  VPGrid() = default;
  VPGrid(int nx_, double Lx_, int nv, double vmax)
      : nx(nx_), Lx(Lx_), v(nv, vmax), kx(fourier_k(nx_, Lx_)) {
    if (nx_ < 3) throw ValidationError("VPGrid: need nx >= 3");
  }

  double dx() const { return Lx / nx; }
  double x(int i) const { return i * dx(); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * v.n; }
  std::size_t idx(int k, int j) const { return static_cast<std::size_t>(k) * v.n + j; }

  // Trapezoid quadrature weight for velocity node j on [-vmax, vmax]; the
  // grid stops one step short of +vmax, where the integrand is taken as 0.
  double vw(int j) const { return j == 0 ? 0.5 * v.dv : v.dv; }
};

struct VPState {
  VPGrid grid;
  State fhat;  // x-Fourier transform of f, layout [k][j]
  double t = 0;
};

// Sample f0(x, v) on the grid and transform to Fourier-x space.
template <class F2>
VPState vp_initialize(VPGrid grid, F2&& f0) {
  VPState s;
  s.grid = std::move(grid);
  s.fhat.resize(s.grid.size());
  for (int i = 0; i < s.grid.nx; ++i)
    for (int j = 0; j < s.grid.v.n; ++j)
      s.fhat[s.grid.idx(i, j)] = f0(s.grid.x(i), s.grid.v.node(j));
  fft::fft_axis(s.fhat, {s.grid.nx, s.grid.v.n}, 0);
  return s;
}

// Weakly perturbed Maxwellian on [0, 4 pi]: (2 pi)^{-1/2} e^{-v^2/2} (1 + 0.001 cos(x/2)).
inline VPState vp_initial_landau(int nx, int nv, double vmax = 8.0, double alpha = 1e-3,
                                 double k0 = 0.5) {
  // One full period of the seeded mode: Lx = 2 pi / k0 (= 4 pi for k0 = 1/2).
  VPGrid g(nx, 2.0 * M_PI / k0, nv, vmax);
  const double c = 1.0 / std::sqrt(2.0 * M_PI);
  return vp_initialize(g, [=](double x, double v) {
    return c * std::exp(-0.5 * v * v) * (1.0 + alpha * std::cos(k0 * x));
  });
}

// Maxwellian plus high-velocity beam on [0, 20 pi]:
// [0.9 (2 pi)^{-1/2} e^{-v^2/2} + 0.2 (2 pi)^{-1/2} e^{-2 (v - 4.5)^2}] (1 + 0.04 cos(0.3 x)).
inline VPState vp_initial_bump_on_tail(int nx, int nv, double vmax = 8.0) {
  VPGrid g(nx, 20.0 * M_PI, nv, vmax);
  const double c = 1.0 / std::sqrt(2.0 * M_PI);
  return vp_initialize(g, [=](double x, double v) {
    const double m = 0.9 * c * std::exp(-0.5 * v * v);
    const double beam = 0.2 * c * std::exp(-2.0 * (v - 4.5) * (v - 4.5));
    return (m + beam) * (1.0 + 0.04 * std::cos(0.3 * x));
  });
}

// Diagonal linear part of the split equation: d_{k,j} = -i v_j k.
inline DiagonalPropagator vp_linear_propagator(const VPGrid& g) {
  State d(g.size());
  for (int k = 0; k < g.nx; ++k)
    for (int j = 0; j < g.v.n; ++j) d[g.idx(k, j)] = cplx(0.0, -g.v.node(j) * g.kx[k]);
  return DiagonalPropagator(std::move(d));
}

// Fourier coefficients of the charge density rho = integral f dv (trapezoid).
inline State vp_rho_hat(const VPGrid& g, const State& fhat) {
  State rho(static_cast<std::size_t>(g.nx));
  for (int k = 0; k < g.nx; ++k) {
    cplx acc = 0.0;
    const cplx* row = fhat.data() + g.idx(k, 0);
    for (int j = 0; j < g.v.n; ++j) acc += g.vw(j) * row[j];
    rho[k] = acc;
  }
  return rho;
}

// Electric field at the x nodes for the given state.
inline std::vector<double> vp_electric_field(const VPGrid& g, const State& fhat,
                                             double* mean_deficit = nullptr) {
  State ehat = poisson_E_hat(vp_rho_hat(g, fhat), g.Lx, mean_deficit);
  fft::ifft_axis(ehat, {g.nx}, 0);
  std::vector<double> e(ehat.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = ehat[i].real();
  return e;
}

// Restore the conjugate symmetry fhat_{-k} = conj(fhat_k) of a real field
// (axis 0 of an [nx][nv] array), averaging the paired rows.
inline void vp_hermitian_symmetrize(State& fhat, int nx, int nv) {
  for (int j = 0; j < nv; ++j) fhat[j] = cplx(fhat[j].real(), 0.0);
  if (nx % 2 == 0) {
    cplx* ny = fhat.data() + static_cast<std::size_t>(nx / 2) * nv;
    for (int j = 0; j < nv; ++j) ny[j] = cplx(ny[j].real(), 0.0);
  }
  for (int k = 1; 2 * k < nx; ++k) {
    cplx* a = fhat.data() + static_cast<std::size_t>(k) * nv;
    cplx* b = fhat.data() + static_cast<std::size_t>(nx - k) * nv;
    for (int j = 0; j < nv; ++j) {
      const cplx avg = 0.5 * (a[j] + std::conj(b[j]));
      a[j] = avg;
      b[j] = std::conj(avg);
    }
  }
}

// Largest asymmetry |fhat_{-k} - conj(fhat_k)| of the state.
inline double vp_hermitian_defect(const State& fhat, int nx, int nv) {
  double m = 0.0;
  for (int j = 0; j < nv; ++j) m = std::max(m, std::abs(fhat[j].imag()));
  for (int k = 1; 2 * k <= nx; ++k) {
    const cplx* a = fhat.data() + static_cast<std::size_t>(k) * nv;
    const cplx* b = fhat.data() + static_cast<std::size_t>((nx - k) % nx) * nv;
    for (int j = 0; j < nv; ++j) m = std::max(m, std::abs(a[j] - std::conj(b[j])));
  }
  return m;
}

// Explicit nonlinearity F(f) = -(E df/dv)^ in Fourier-x space, the velocity
// derivative by CD2 or sign-split WENO5 with zero-extension ghosts.
// Reusable workspaces make this cheap to call once per stage.
class VPRhs {
public:
  VPRhs(VPGrid g, VScheme scheme, bool frozen_weights = false)
      : g_(std::move(g)), scheme_(scheme), frozen_(frozen_weights) {
    const int nv = g_.v.n;
    freal_.resize(g_.size());
    fcol_.assign(static_cast<std::size_t>(nv) + 6, 0.0);
    dcol_.resize(static_cast<std::size_t>(nv));
    flux_.resize(static_cast<std::size_t>(nv) + 1);
  }

  const VPGrid& grid() const { return g_; }
  VScheme scheme() const { return scheme_; }

  void operator()(double /*t*/, const State& fhat, State& out) {
    const int nx = g_.nx, nv = g_.v.n;
    E_ = vp_electric_field(g_, fhat, &mean_deficit_);

    freal_ = fhat;
    fft::ifft_axis(freal_, {nx, nv}, 0);

    for (int i = 0; i < nx; ++i) {
      cplx* row = freal_.data() + g_.idx(i, 0);
      for (int j = 0; j < nv; ++j) fcol_[3 + j] = row[j].real();
      if (scheme_ == VScheme::cd2) {
        cd2_dv(fcol_.data(), nv, g_.v.dv, dcol_.data());
        const double e = E_[i];
        for (int j = 0; j < nv; ++j) row[j] = e * dcol_[j];
      } else {
        v_transport_term(fcol_.data(), nv, E_[i], g_.v.dv, dcol_.data(), flux_.data(),
                         frozen_);
        for (int j = 0; j < nv; ++j) row[j] = dcol_[j];
      }
    }

    fft::fft_axis(freal_, {nx, nv}, 0);
    out.resize(g_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -freal_[i];
  }

  // E(x) from the most recent evaluation.
  const std::vector<double>& last_electric_field() const { return E_; }
  double last_mean_deficit() const { return mean_deficit_; }

private:
  VPGrid g_;
  VScheme scheme_;
  bool frozen_;
  State freal_;
  std::vector<double> fcol_, dcol_, flux_, E_;
  double mean_deficit_ = 0.0;
};

// Step-size rule dt = C dv / |E|_inf, optionally capped by an accuracy limit.
struct CflRule {
  double C = 0.0;  // y_max or sigma of the chosen integrator/scheme pair
  VScheme scheme = VScheme::weno5;
  double dt_cap = std::numeric_limits<double>::infinity();
};

inline double cfl_dt(const CflRule& rule, double e_inf, double dv) {
  if (rule.C <= 0.0) throw ValidationError("cfl_dt: need C > 0");
  if (e_inf < 0.0) throw ValidationError("cfl_dt: |E| must be nonnegative");
  const double dt =
      e_inf > 0.0 ? rule.C * dv / e_inf : std::numeric_limits<double>::infinity();
  return std::min(dt, rule.dt_cap);
}

struct VPDiagnostics {
  double electric_energy = 0;  // |E|_{L^2}
  double total_energy = 0;     // 1/2 integral v^2 f + 1/2 integral E^2
  double mass = 0;             // integral integral f
  double l2norm = 0;           // ||f||_{L^2} (rectangle in x, trapezoid in v)
};

inline VPDiagnostics vp_diagnostics(const VPGrid& g, const State& fhat) {
  VPDiagnostics d;
  const double dx = g.dx();
  const int nx = g.nx, nv = g.v.n;

  State ehat = poisson_E_hat(vp_rho_hat(g, fhat), g.Lx);
  // Parseval: sum_i |E_i|^2 = (1/nx) sum_k |Ehat_k|^2 for the unnormalised DFT.
  const double e2 = l2_norm_sq(ehat) / nx;
  d.electric_energy = std::sqrt(dx * e2);

  // x sums of f are the k = 0 Fourier row.
  const cplx* row0 = fhat.data() + g.idx(0, 0);
  double kin = 0.0, mass = 0.0;
  for (int j = 0; j < nv; ++j) {
    const double vj = g.v.node(j), w = g.vw(j);
    kin += w * vj * vj * row0[j].real();
    mass += w * row0[j].real();
  }
  d.total_energy = 0.5 * dx * kin + 0.5 * dx * e2;
  d.mass = dx * mass;

  std::vector<double> sq(fhat.size());
  for (int k = 0; k < nx; ++k)
    for (int j = 0; j < nv; ++j) sq[g.idx(k, j)] = g.vw(j) * std::norm(fhat[g.idx(k, j)]);
  d.l2norm = std::sqrt(dx / nx * pairwise_sum(sq));
  return d;
}

struct VPDiagRow {
  double t = 0, dt = 0;
  double electric_energy = 0, total_energy = 0, mass = 0, l2norm = 0;
};

struct VPRunConfig {
  std::string method = "lawson_rk44";
  VScheme scheme = VScheme::weno5;
  double tfinal = 40.0;
  double dt_fixed = 0.0;  // > 0 selects fixed stepping; otherwise the CFL rule is used
  CflRule cfl;
  double blowup_factor = 1e6;  // instability declared when ||f|| exceeds this times ||f0||
  bool frozen_weights = false;
  long max_steps = 100000000;
};

struct VPRunResult {
  std::vector<VPDiagRow> rows;
  RunOutcome outcome = RunOutcome::completed;
  VPState final_state;
};

// March the state to tfinal, recording diagnostics each step.  The row at
// index n holds the diagnostics at time t_n together with the step size used
// to LEAVE t_n (the final row's dt is 0).
inline VPRunResult vp_run(VPState state, const VPRunConfig& cfg) {
  if (cfg.dt_fixed <= 0.0 && cfg.cfl.C <= 0.0)
    throw ValidationError("vp_run: need a fixed dt or a CFL constant");
  const VPGrid& g = state.grid;
  DiagonalPropagator A = vp_linear_propagator(g);
  VPRhs rhs(g, cfg.scheme, cfg.frozen_weights);
  Rhs F = [&rhs](double t, const State& u, State& du) { rhs(t, u, du); };
  auto integ = make_integrator(cfg.method);

  VPRunResult res;
  VPDiagnostics d0 = vp_diagnostics(g, state.fhat);
  const double l2_0 = d0.l2norm;
  res.rows.push_back({state.t, 0.0, d0.electric_energy, d0.total_energy, d0.mass, d0.l2norm});

  State next;
  const double t_end = state.t + cfg.tfinal;
  for (long n = 0; n < cfg.max_steps && state.t < t_end - 1e-12 * cfg.tfinal; ++n) {
    double dt;
    if (cfg.dt_fixed > 0.0) {
      dt = cfg.dt_fixed;
    } else {
      double e_inf = 0.0;
      for (double e : vp_electric_field(g, state.fhat)) e_inf = std::max(e_inf, std::abs(e));
      dt = cfl_dt(cfg.cfl, e_inf, g.v.dv);
      if (!std::isfinite(dt)) dt = cfg.tfinal;  // field identically zero, no cap set
    }
    dt = std::min(dt, t_end - state.t);

    integ->step(A, F, state.t, state.fhat, dt, next);
    state.fhat.swap(next);
    vp_hermitian_symmetrize(state.fhat, g.nx, g.v.n);
    state.t += dt;

    res.rows.back().dt = dt;
    VPDiagnostics d = vp_diagnostics(g, state.fhat);
    res.rows.push_back({state.t, 0.0, d.electric_energy, d.total_energy, d.mass, d.l2norm});

    if (!all_finite(state.fhat) || d.l2norm > cfg.blowup_factor * l2_0) {
      res.outcome = RunOutcome::blow_up;
      break;
    }
  }
  res.final_state = std::move(state);
  return res;
}

// ---------------------------------------------------------------------------
// Constant-coefficient transport with discontinuous data:
//   df/dt + d df/dx + b df/dv = 0 on [0, 2 pi] x [-vmax, vmax],
//   f0 = 1 inside the unit disc centred at (pi, 0).
// x-advection is the exact diagonal part, b df/dv is the explicit CD2 term.
// The per-mode amplification bound behind the experiment comes from the
// double-Fourier diagonalisation, so the CD2 stencil wraps periodically in v
// (the disc vanishes well inside the domain).
// ---------------------------------------------------------------------------

struct LinearTransportResult {
  std::vector<double> ratio;  // ||f^n||^2 / ||f^0||^2, n = 0..n_steps
  double dt = 0;
  double y_max = 0;  // CFL number used to pick dt
};

inline LinearTransportResult run_linear_transport(double d, double b, double v_max,
                                                  const std::string& method, double eps,
                                                  int nx = 64, int nv = 64,
                                                  int n_steps = 100) {
  VPGrid g(nx, 2.0 * M_PI, nv, v_max);
  VPState s = vp_initialize(g, [](double x, double v) {
    const double dx = x - M_PI;
    return (std::sqrt(dx * dx + v * v) <= 1.0) ? 1.0 : 0.0;
  });

  LinearTransportResult res;
  if (method.rfind("lawson_", 0) == 0) {
    const ButcherTableau* tb = find_tableau(method.substr(7));
    if (!tb) throw ValidationError("run_linear_transport: unknown method " + method);
    res.y_max = ymax_lawson(*tb);
  } else {
    res.y_max = ymax_exp(method, eps).y_max;
  }
  if (res.y_max <= 0.0)
    throw ValidationError("run_linear_transport: empty stability interval for " + method);
  res.dt = res.y_max * g.v.dv / (b != 0.0 ? std::abs(b) : 1.0);

  State sym(g.size());
  for (int k = 0; k < nx; ++k)
    for (int j = 0; j < nv; ++j) sym[g.idx(k, j)] = cplx(0.0, -d * g.kx[k]);
  DiagonalPropagator A(std::move(sym));

  const double inv2dv = 1.0 / (2.0 * g.v.dv);
  Rhs F = [&, b, inv2dv](double, const State& u, State& du) {
    du.resize(u.size());
    const int n = g.v.n;
    for (int k = 0; k < g.nx; ++k) {
      const cplx* row = u.data() + g.idx(k, 0);
      cplx* out = du.data() + g.idx(k, 0);
      for (int j = 0; j < n; ++j) {
        const cplx up = row[(j + 1) % n], dn = row[(j - 1 + n) % n];
        out[j] = -b * (up - dn) * inv2dv;
      }
    }
  };

  auto integ = make_integrator(method);
  const double n0 = l2_norm_sq(s.fhat);
  res.ratio.reserve(n_steps + 1);
  res.ratio.push_back(1.0);
  State next;
  for (int n = 0; n < n_steps; ++n) {
    integ->step(A, F, s.t, s.fhat, res.dt, next);
    s.fhat.swap(next);
    s.t += res.dt;
    res.ratio.push_back(l2_norm_sq(s.fhat) / n0);
  }
  return res;
}

}  // namespace vlexp
