// 4D slab drift-kinetic solver on (r, theta, z, v):
//
//   df/dt - (d_theta phi / r) d_r f + (d_r phi / r) d_theta f
//         + v d_z f - d_z phi d_v f = 0,
//
// closed by the quasi-neutrality equation for phi.  The free streaming
// v d_z f is diagonal in a z-Fourier basis and is handled exactly by the
// exponential part of Lawson / exponential integrators; everything else
// (Arakawa bracket advection, v-transport by the parallel field, and the
// equilibrium source terms of the perturbation formulation) goes into the
// nonlinear remainder F.
//
// State layout: complex field indexed [v][z][r][theta] (theta fastest), with
// the z axis in Fourier space between steps.  The r direction is a bounded
// interval including both endpoints; theta and z are periodic without
// duplicated endpoints; v is a bounded symmetric interval including both
// endpoints.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "vlexp/control.hpp"
#include "vlexp/fft.hpp"
#include "vlexp/integrators.hpp"
#include "vlexp/propagator.hpp"
#include "vlexp/spectral.hpp"
#include "vlexp/util.hpp"

namespace vlexp {

// ---------------------------------------------------------------------------
// Radial profiles P(r) = C_P exp(-kappa_P delta_P tanh((r - r_p)/delta_P)).
// ---------------------------------------------------------------------------

struct ProfileShape {
  double kappa = 0.0;
  double delta_r = 1.0;
  double C = 1.0;
  double value(double r, double r_p) const {
    return C * std::exp(-kappa * delta_r * std::tanh((r - r_p) / delta_r));
  }
};

struct RadialProfiles {
  double r_min = 0.1;
  double r_max = 14.5;
  double r_p = 7.3;
  ProfileShape n0_shape, ti_shape, te_shape;

  double n0(double r) const { return n0_shape.value(r, r_p); }
  double Ti(double r) const { return ti_shape.value(r, r_p); }
  double Te(double r) const { return te_shape.value(r, r_p); }
  // d(log n0)/dr = -kappa_n0 sech^2((r - r_p)/delta_n0), analytic.
  double dlog_n0(double r) const {
    const double c = std::cosh((r - r_p) / n0_shape.delta_r);
    return -n0_shape.kappa / (c * c);
  }

  // Ion-temperature-gradient benchmark constants (the "medium" case):
  // kappa_n0 = 0.055, kappa_T = 0.27586, delta_T = 1.45, delta_n0 = 2.9,
  // C_T = 1 and C_n0 normalizing the density integral to r_max - r_min.
  static RadialProfiles medium() {
    RadialProfiles p;
    p.r_min = 0.1;
    p.r_max = 14.5;
    p.r_p = 0.5 * (p.r_min + p.r_max);
    p.n0_shape = {0.055, 2.9, 1.0};
    p.ti_shape = {0.27586, 1.45, 1.0};
    p.te_shape = {0.27586, 1.45, 1.0};
    // C_n0 = (r_max - r_min) / integral of the unnormalized shape, by
    // composite Simpson quadrature well past round-off for this smooth shape.
    const int n = 20000;  // intervals (even)
    const double h = (p.r_max - p.r_min) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * p.n0_shape.value(p.r_min + i * h, p.r_p);
    }
    acc *= h / 3.0;
    p.n0_shape.C = (p.r_max - p.r_min) / acc;
    return p;
  }
};

// Maxwellian equilibrium f_eq(r, v) = n0(r) exp(-v^2/(2 T_i(r))) / sqrt(2 pi T_i(r)).
inline double equilibrium(double r, double v, const RadialProfiles& prof) {
  const double T = prof.Ti(r);
  return prof.n0(r) * std::exp(-v * v / (2.0 * T)) / std::sqrt(2.0 * M_PI * T);
}

// ---------------------------------------------------------------------------
// Grid.
// ---------------------------------------------------------------------------

struct DKGrid {
  int nr, ntheta, nz, nv;
  double r_min, r_max, L, v_max;
  double dr, dtheta, dz, dv;

  DKGrid(int nr_, int ntheta_, int nz_, int nv_, double r_min_ = 0.1,
         double r_max_ = 14.5, double L_ = 1506.759067, double v_max_ = 7.32)
      : nr(nr_), ntheta(ntheta_), nz(nz_), nv(nv_), r_min(r_min_), r_max(r_max_),
        L(L_), v_max(v_max_) {
    if (nr < 3) throw ValidationError("DKGrid: need at least 3 radial nodes");
    if (ntheta < 4 || nz < 2 || nv < 3)
      throw ValidationError("DKGrid: angular/parallel/velocity grid too small");
    if (!(r_min > 0.0)) throw ValidationError("DKGrid: r_min must be positive");
    if (!(r_max > r_min)) throw ValidationError("DKGrid: r_max must exceed r_min");
    dr = (r_max - r_min) / (nr - 1);
    dtheta = 2.0 * M_PI / ntheta;
    dz = L / nz;
    dv = 2.0 * v_max / (nv - 1);
  }

  double r(int i) const { return r_min + i * dr; }
  double theta(int j) const { return j * dtheta; }
  double z(int k) const { return k * dz; }
  double v(int l) const { return -v_max + l * dv; }
  // Trapezoid weights on the endpoint-inclusive bounded axes.
  double wr(int i) const { return (i == 0 || i == nr - 1) ? 0.5 * dr : dr; }
  double wv(int l) const { return (l == 0 || l == nv - 1) ? 0.5 * dv : dv; }

  std::size_t size() const {
    return std::size_t(nv) * nz * nr * ntheta;
  }
  std::size_t field_size() const { return std::size_t(nz) * nr * ntheta; }
  std::size_t idx(int iv, int iz, int ir, int it) const {
    return ((std::size_t(iv) * nz + iz) * nr + ir) * ntheta + it;
  }
  std::size_t fidx(int iz, int ir, int it) const {
    return (std::size_t(iz) * nr + ir) * ntheta + it;
  }
};

enum class DKFormulation { direct, perturbation };

inline DKFormulation dk_formulation_from_name(const std::string& s) {
  if (s == "direct") return DKFormulation::direct;
  if (s == "pert" || s == "perturbation") return DKFormulation::perturbation;
  throw ValidationError("unknown formulation '" + s + "' (use direct|pert)");
}

inline std::string to_string(DKFormulation f) {
  return f == DKFormulation::direct ? "direct" : "pert";
}

// ---------------------------------------------------------------------------
// Arakawa bracket J(p, q) ~ d_r p d_theta q - d_theta p d_r q: the classical
// nine-point average (J^{++} + J^{+x} + J^{x+})/3, second order, conserving
// the discrete sums of J, pJ and qJ.  Slices are [r][theta] with theta
// periodic; the bounded-r rows 0 and nr-1 hold boundary values that are read
// but not written (output is zeroed there).
// ---------------------------------------------------------------------------

inline void arakawa_bracket(const cplx* p, const cplx* q, int nr, int ntheta,
                            double dr, double dtheta, cplx* out) {
  const double s = 1.0 / (12.0 * dr * dtheta);
  std::fill(out, out + ntheta, cplx(0.0));
  std::fill(out + std::size_t(nr - 1) * ntheta, out + std::size_t(nr) * ntheta,
            cplx(0.0));
  for (int ir = 1; ir + 1 < nr; ++ir) {
    const cplx* pm = p + std::size_t(ir - 1) * ntheta;
    const cplx* p0 = p + std::size_t(ir) * ntheta;
    const cplx* pp = p + std::size_t(ir + 1) * ntheta;
    const cplx* qm = q + std::size_t(ir - 1) * ntheta;
    const cplx* q0 = q + std::size_t(ir) * ntheta;
    const cplx* qp = q + std::size_t(ir + 1) * ntheta;
    cplx* o = out + std::size_t(ir) * ntheta;
    for (int it = 0; it < ntheta; ++it) {
      const int tp = (it + 1 == ntheta) ? 0 : it + 1;
      const int tm = (it == 0) ? ntheta - 1 : it - 1;
      const cplx j1 = (pp[it] - pm[it]) * (q0[tp] - q0[tm]) -
                      (p0[tp] - p0[tm]) * (qp[it] - qm[it]);
      const cplx j2 = pp[it] * (qp[tp] - qp[tm]) - pm[it] * (qm[tp] - qm[tm]) -
                      p0[tp] * (qp[tp] - qm[tp]) + p0[tm] * (qp[tm] - qm[tm]);
      const cplx j3 = pp[tp] * (q0[tp] - qp[it]) - pm[tm] * (qm[it] - q0[tm]) -
                      pm[tp] * (q0[tp] - qm[it]) + pp[tm] * (qp[it] - q0[tm]);
      o[it] = s * (j1 + j2 + j3);
    }
  }
}

// ---------------------------------------------------------------------------
// Quasi-neutrality solve.  Per (theta-mode m, z-mode k):
//
//   -[phi'' + (1/r + n0'/n0) phi' - m^2/r^2 phi] + (1/T_e)(phi - <phi>) = rho
//
// with homogeneous Dirichlet conditions in r.  <phi> is the z-average, i.e.
// exactly the k = 0 mode: the 1/T_e term cancels entirely for k = 0 and acts
// in full for k != 0.  Second-order centered differences in r give a
// tridiagonal system per mode, pre-factorized per (|m|, k==0).
// ---------------------------------------------------------------------------

class QNSolver {
 public:
  QNSolver(const DKGrid& grid, const RadialProfiles& prof)
      : nr_(grid.nr), nt_(grid.ntheta), nz_(grid.nz), dr_(grid.dr), ni_(grid.nr - 2) {
    std::vector<double> g(ni_), s(ni_), r(ni_);
    for (int i = 0; i < ni_; ++i) {
      r[i] = grid.r(i + 1);
      g[i] = 1.0 / r[i] + prof.dlog_n0(r[i]);
      s[i] = 1.0 / prof.Te(r[i]);
    }
    fac_.resize(std::size_t(nt_ / 2 + 1) * 2);
    for (int m = 0; m <= nt_ / 2; ++m)
      for (int te_on = 0; te_on < 2; ++te_on) {
        Factor& f = fac_[std::size_t(m) * 2 + te_on];
        f.low.resize(ni_);
        f.diag_inv.resize(ni_);
        f.upper.resize(ni_);
        std::vector<double> diag(ni_);
        const double msq = double(m) * double(m);
        for (int i = 0; i < ni_; ++i) {
          f.low[i] = -1.0 / (dr_ * dr_) + g[i] / (2.0 * dr_);   // couples to i-1
          f.upper[i] = -1.0 / (dr_ * dr_) - g[i] / (2.0 * dr_); // couples to i+1
          diag[i] = 2.0 / (dr_ * dr_) + msq / (r[i] * r[i]) + (te_on ? s[i] : 0.0);
        }
        // Thomas factorization: diag becomes the eliminated pivot sequence.
        double u = diag[0];
        if (!(std::abs(u) > 1e-14 / (dr_ * dr_)))
          throw ValidationError("quasi-neutrality: singular mode system");
        f.diag_inv[0] = 1.0 / u;
        for (int i = 1; i < ni_; ++i) {
          f.low[i] *= f.diag_inv[i - 1];   // l_i = a_i / u_{i-1}
          u = diag[i] - f.low[i] * f.upper[i - 1];
          if (!(std::abs(u) > 1e-14 / (dr_ * dr_)))
            throw ValidationError("quasi-neutrality: singular mode system");
          f.diag_inv[i] = 1.0 / u;
        }
      }
  }

  // charge_hat and phi_hat: z-Fourier fields laid out [z-mode][r][theta]
  // (theta in real space).  Boundary r-rows of phi_hat are set to zero.
  void solve(const State& charge_hat, State& phi_hat) const {
    const std::size_t fsz = std::size_t(nz_) * nr_ * nt_;
    if (charge_hat.size() != fsz)
      throw ValidationError("QNSolver: field size mismatch");
    phi_hat.resize(fsz);
    State slice(std::size_t(nr_) * nt_);
    State col(ni_);
    for (int iz = 0; iz < nz_; ++iz) {
      std::copy_n(charge_hat.data() + std::size_t(iz) * nr_ * nt_, slice.size(),
                  slice.data());
      fft::fft_axis(slice, {nr_, nt_}, 1);
      const int te_on = (iz != 0) ? 1 : 0;
      for (int mi = 0; mi < nt_; ++mi) {
        const int m = (mi <= nt_ / 2) ? mi : mi - nt_;
        const Factor& f = fac_[std::size_t(std::abs(m)) * 2 + te_on];
        for (int i = 0; i < ni_; ++i) col[i] = slice[std::size_t(i + 1) * nt_ + mi];
        for (int i = 1; i < ni_; ++i) col[i] -= f.low[i] * col[i - 1];
        col[ni_ - 1] *= f.diag_inv[ni_ - 1];
        for (int i = ni_ - 2; i >= 0; --i)
          col[i] = (col[i] - f.upper[i] * col[i + 1]) * f.diag_inv[i];
        slice[mi] = 0.0;
        slice[std::size_t(nr_ - 1) * nt_ + mi] = 0.0;
        for (int i = 0; i < ni_; ++i) slice[std::size_t(i + 1) * nt_ + mi] = col[i];
      }
      fft::ifft_axis(slice, {nr_, nt_}, 1);
      std::copy_n(slice.data(), slice.size(), phi_hat.data() + std::size_t(iz) * nr_ * nt_);
    }
  }

 private:
  struct Factor {
    std::vector<double> low, diag_inv, upper;
  };
  int nr_, nt_, nz_;
  double dr_;
  int ni_;
  std::vector<Factor> fac_;
};

// ---------------------------------------------------------------------------
// Solver: equilibrium tables, right-hand side, diagnostics.
// ---------------------------------------------------------------------------

struct DKDiagnostics {
  double elec_energy = 0;  // sqrt(int phi^2(r_p, theta, z) dtheta dz)
  double mass = 0;         // int f  r dr dtheta dz dv
  double energy = 0;       // int (v^2/2) f + int f phi, same measure
};

class DKSolver {
 public:
  DKSolver(DKGrid grid, RadialProfiles prof, DKFormulation form)
      : g_(grid), prof_(prof), form_(form), qn_(grid, prof) {
    const int nr = g_.nr, nv = g_.nv;
    feq_.resize(std::size_t(nv) * nr);
    drfeq_.resize(std::size_t(nv) * nr);
    dvfeq_.resize(std::size_t(nv) * nr);
    ghost_lo_.resize(nr);
    ghost_hi_.resize(nr);
    for (int iv = 0; iv < nv; ++iv)
      for (int ir = 0; ir < nr; ++ir) {
        const double r = g_.r(ir), v = g_.v(iv);
        feq_[std::size_t(iv) * nr + ir] = equilibrium(r, v, prof_);
        // Source-term radial derivative by centered differences on the
        // analytic equilibrium (one-node analytic extension past the ends).
        drfeq_[std::size_t(iv) * nr + ir] =
            (equilibrium(r + g_.dr, v, prof_) - equilibrium(r - g_.dr, v, prof_)) /
            (2.0 * g_.dr);
        dvfeq_[std::size_t(iv) * nr + ir] = -(v / prof_.Ti(r)) * feq_[std::size_t(iv) * nr + ir];
      }
    for (int ir = 0; ir < nr; ++ir) {
      ghost_lo_[ir] = equilibrium(g_.r(ir), -g_.v_max - g_.dv, prof_);
      ghost_hi_[ir] = equilibrium(g_.r(ir), g_.v_max + g_.dv, prof_);
    }
    kz_ = fourier_k(g_.nz, g_.L);
    // Static part of the diagnostics (the equilibrium does not evolve in the
    // perturbation formulation; computing its discrete moments once makes the
    // relative-error series start at exactly zero).
    eq_mass_ = 0.0;
    eq_kin_ = 0.0;
    for (int iv = 0; iv < nv; ++iv)
      for (int ir = 0; ir < nr; ++ir) {
        const double w = g_.wv(iv) * g_.wr(ir) * g_.r(ir) * g_.dtheta * g_.dz *
                         double(g_.ntheta) * double(g_.nz);
        eq_mass_ += w * feq_[std::size_t(iv) * nr + ir];
        eq_kin_ += w * 0.5 * g_.v(iv) * g_.v(iv) * feq_[std::size_t(iv) * nr + ir];
      }
  }

  const DKGrid& grid() const { return g_; }
  const RadialProfiles& profiles() const { return prof_; }
  DKFormulation formulation() const { return form_; }
  const std::vector<double>& f_eq_table() const { return feq_; }

  // Optional audit of the bracket's conserved sums (mean, energy, enstrophy
  // pairings).  When enabled, every rhs() call aggregates the signed sums and
  // their absolute-value counterparts over all bracket slices and folds the
  // relative-cancellation ratios into a running worst case.
  void set_bracket_audit(bool on) {
    audit_ = on;
    reset_bracket_audit();
  }
  void reset_bracket_audit() {
    worst_ratio_ = {0.0, 0.0, 0.0};
    audit_evals_ = 0;
  }
  // worst observed { |sum J| / sum |J|, |sum phi J| / sum |phi J|,
  //                  |sum f J| / sum |f J| } across audited evaluations
  const std::array<double, 3>& worst_bracket_ratios() const { return worst_ratio_; }
  long audited_evaluations() const { return audit_evals_; }

  // Free-streaming symbols -i v k_z, waiting to be wrapped in a
  // DiagonalPropagator (one entry per state element).
  State propagator_symbols() const {
    State sym(g_.size());
    for (int iv = 0; iv < g_.nv; ++iv)
      for (int iz = 0; iz < g_.nz; ++iz) {
        const cplx s(0.0, -g_.v(iv) * kz_[iz]);
        const std::size_t base = g_.idx(iv, iz, 0, 0);
        std::fill_n(sym.begin() + base, std::size_t(g_.nr) * g_.ntheta, s);
      }
    return sym;
  }

  // Nonlinear right-hand side F in z-Fourier space.
  void rhs(double /*t*/, const State& fhat, State& out) {
    if (fhat.size() != g_.size()) throw ValidationError("DKSolver: state size mismatch");
    const int nr = g_.nr, nt = g_.ntheta, nz = g_.nz, nv = g_.nv;

    solve_fields(fhat);

    // Real-space copy of the state for the nonlinear terms.
    freal_ = fhat;
    fft::ifft_axis(freal_, {nv, nz, nr, nt}, 1);

    out.assign(g_.size(), cplx(0.0));
    jwork_.resize(std::size_t(nr) * nt);

    // Bracket advection: -J(phi, f)/r slice by slice.
    cplx sj = 0, spj = 0, sqj = 0;
    double aj = 0, apj = 0, aqj = 0;
    for (int iv = 0; iv < nv; ++iv)
      for (int iz = 0; iz < nz; ++iz) {
        const cplx* fsl = freal_.data() + g_.idx(iv, iz, 0, 0);
        const cplx* psl = phi_real_.data() + g_.fidx(iz, 0, 0);
        arakawa_bracket(psl, fsl, nr, nt, g_.dr, g_.dtheta, jwork_.data());
        cplx* o = out.data() + g_.idx(iv, iz, 0, 0);
        for (int ir = 1; ir + 1 < nr; ++ir) {
          const double inv_r = 1.0 / g_.r(ir);
          const cplx* j = jwork_.data() + std::size_t(ir) * nt;
          cplx* orow = o + std::size_t(ir) * nt;
          for (int it = 0; it < nt; ++it) orow[it] -= inv_r * j[it];
        }
        if (audit_)
          for (int ir = 1; ir + 1 < nr; ++ir)
            for (int it = 0; it < nt; ++it) {
              const cplx jv = jwork_[std::size_t(ir) * nt + it];
              const cplx pv = psl[std::size_t(ir) * nt + it];
              const cplx qv = fsl[std::size_t(ir) * nt + it];
              sj += jv;
              spj += pv * jv;
              sqj += qv * jv;
              aj += std::abs(jv);
              apj += std::abs(pv * jv);
              aqj += std::abs(qv * jv);
            }
      }
    if (audit_) {
      auto fold = [](double& worst, const cplx& s, double a) {
        if (a > 0.0) worst = std::max(worst, std::abs(s) / a);
      };
      fold(worst_ratio_[0], sj, aj);
      fold(worst_ratio_[1], spj, apj);
      fold(worst_ratio_[2], sqj, aqj);
      ++audit_evals_;
    }

    // Parallel-field advection in v: + d_z phi * d_v f with centered
    // differences; ghosts past +-v_max are equilibrium values (direct) or
    // zero (perturbation).
    const double inv2dv = 1.0 / (2.0 * g_.dv);
    const bool direct = form_ == DKFormulation::direct;
    for (int iv = 0; iv < nv; ++iv) {
      const cplx* below = (iv > 0) ? freal_.data() + g_.idx(iv - 1, 0, 0, 0) : nullptr;
      const cplx* above =
          (iv + 1 < nv) ? freal_.data() + g_.idx(iv + 1, 0, 0, 0) : nullptr;
      cplx* o = out.data() + g_.idx(iv, 0, 0, 0);
      for (int iz = 0; iz < nz; ++iz)
        for (int ir = 1; ir + 1 < nr; ++ir) {
          const std::size_t off = g_.fidx(iz, ir, 0);
          const cplx* dz_phi = dzphi_real_.data() + off;
          cplx* orow = o + off;
          const cplx ghost_b = direct ? cplx(ghost_lo_[ir]) : cplx(0.0);
          const cplx ghost_a = direct ? cplx(ghost_hi_[ir]) : cplx(0.0);
          for (int it = 0; it < nt; ++it) {
            const cplx fb = below ? below[off + it] : ghost_b;
            const cplx fa = above ? above[off + it] : ghost_a;
            orow[it] += dz_phi[it] * (fa - fb) * inv2dv;
          }
        }
    }

    // Perturbation-formulation sources: + (d_theta phi / r) d_r f_eq
    // + d_z phi * d_v f_eq (phi derivatives as above, f_eq derivatives from
    // the precomputed tables).
    if (form_ == DKFormulation::perturbation) {
      for (int iv = 0; iv < nv; ++iv) {
        cplx* o = out.data() + g_.idx(iv, 0, 0, 0);
        const double* drf = drfeq_.data() + std::size_t(iv) * nr;
        const double* dvf = dvfeq_.data() + std::size_t(iv) * nr;
        for (int iz = 0; iz < nz; ++iz)
          for (int ir = 1; ir + 1 < nr; ++ir) {
            const std::size_t off = g_.fidx(iz, ir, 0);
            const cplx* dth = dthphi_over_r_.data() + off;
            const cplx* dzp = dzphi_real_.data() + off;
            cplx* orow = o + off;
            const double a = drf[ir], b = dvf[ir];
            for (int it = 0; it < nt; ++it) orow[it] += dth[it] * a + dzp[it] * b;
          }
      }
    }

    // Boundary r-rows are pinned (Dirichlet / equilibrium): no evolution.
    for (int iv = 0; iv < nv; ++iv)
      for (int iz = 0; iz < nz; ++iz) {
        cplx* o = out.data() + g_.idx(iv, iz, 0, 0);
        std::fill_n(o, nt, cplx(0.0));
        std::fill_n(o + std::size_t(nr - 1) * nt, nt, cplx(0.0));
      }

    fft::fft_axis(out, {nv, nz, nr, nt}, 1);
  }

  // Charge, potential and field derivatives for a given state; leaves the
  // results in the public-by-accessor caches below (also used by rhs()).
  void solve_fields(const State& fhat) {
    const int nr = g_.nr, nt = g_.ntheta, nz = g_.nz, nv = g_.nv;
    charge_hat_.assign(g_.field_size(), cplx(0.0));
    for (int iv = 0; iv < nv; ++iv) {
      const double wv = g_.wv(iv);
      const cplx* f = fhat.data() + g_.idx(iv, 0, 0, 0);
      for (std::size_t i = 0; i < g_.field_size(); ++i) charge_hat_[i] += wv * f[i];
    }
    for (int iz = 0; iz < nz; ++iz)
      for (int ir = 0; ir < nr; ++ir) {
        const double inv_n0 = 1.0 / prof_.n0(g_.r(ir));
        cplx* c = charge_hat_.data() + g_.fidx(iz, ir, 0);
        for (int it = 0; it < nt; ++it) c[it] *= inv_n0;
      }
    if (form_ == DKFormulation::direct) {
      // subtract the ion background: z-transform of the constant 1
      cplx* c0 = charge_hat_.data();
      for (std::size_t i = 0; i < std::size_t(nr) * nt; ++i) c0[i] -= double(nz);
    }

    qn_.solve(charge_hat_, phi_hat_);

    phi_real_ = phi_hat_;
    fft::ifft_axis(phi_real_, {nz, nr, nt}, 0);

    dzphi_real_.resize(g_.field_size());
    for (int iz = 0; iz < nz; ++iz) {
      const cplx ik(0.0, kz_[iz]);
      const cplx* p = phi_hat_.data() + g_.fidx(iz, 0, 0);
      cplx* d = dzphi_real_.data() + g_.fidx(iz, 0, 0);
      for (std::size_t i = 0; i < std::size_t(nr) * nt; ++i) d[i] = ik * p[i];
    }
    fft::ifft_axis(dzphi_real_, {nz, nr, nt}, 0);

    if (form_ == DKFormulation::perturbation) {
      dthphi_over_r_.resize(g_.field_size());
      const double inv2dt = 1.0 / (2.0 * g_.dtheta);
      for (int iz = 0; iz < nz; ++iz)
        for (int ir = 0; ir < nr; ++ir) {
          const double c = inv2dt / g_.r(ir);
          const cplx* p = phi_real_.data() + g_.fidx(iz, ir, 0);
          cplx* d = dthphi_over_r_.data() + g_.fidx(iz, ir, 0);
          for (int it = 0; it < nt; ++it) {
            const int tp = (it + 1 == nt) ? 0 : it + 1;
            const int tm = (it == 0) ? nt - 1 : it - 1;
            d[it] = (p[tp] - p[tm]) * c;
          }
        }
    }
  }

  const State& last_charge_hat() const { return charge_hat_; }
  const State& last_phi_hat() const { return phi_hat_; }
  const State& last_phi_real() const { return phi_real_; }

  DKDiagnostics diagnostics(const State& fhat) {
    solve_fields(fhat);
    const int nr = g_.nr, nt = g_.ntheta, nz = g_.nz, nv = g_.nv;
    DKDiagnostics d;

    // Electric energy: phi at r_p by linear interpolation between the
    // bracketing radial nodes, squared and integrated over theta and z.
    {
      const double x = (prof_.r_p - g_.r_min) / g_.dr;
      const int lo = std::clamp(int(std::floor(x)), 0, nr - 2);
      const double w = x - lo;
      double acc = 0.0;
      for (int iz = 0; iz < nz; ++iz)
        for (int it = 0; it < nt; ++it) {
          const double ph =
              (1.0 - w) * phi_real_[g_.fidx(iz, lo, it)].real() +
              w * phi_real_[g_.fidx(iz, lo + 1, it)].real();
          acc += ph * ph;
        }
      d.elec_energy = std::sqrt(acc * g_.dtheta * g_.dz);
    }

    // Mass and energy from the k_z = 0 row (mass, kinetic part) and the
    // z-Parseval pairing with phi (field part); the equilibrium contribution
    // enters through its precomputed discrete moments.
    const bool pert = form_ == DKFormulation::perturbation;
    double mass = pert ? eq_mass_ : 0.0;
    double kin = pert ? eq_kin_ : 0.0;
    double field = 0.0;
    for (int iv = 0; iv < nv; ++iv) {
      const double v2 = 0.5 * g_.v(iv) * g_.v(iv);
      for (int ir = 0; ir < nr; ++ir) {
        const double w = g_.wv(iv) * g_.wr(ir) * g_.r(ir) * g_.dtheta * g_.dz;
        const cplx* f0 = fhat.data() + g_.idx(iv, 0, ir, 0);
        double srow = 0.0;
        for (int it = 0; it < nt; ++it) srow += f0[it].real();
        mass += w * srow;
        kin += w * v2 * srow;
        // int f phi dz = dz/nz * sum_k fhat_k conj(phihat_k)
        double frow = 0.0;
        for (int iz = 0; iz < nz; ++iz) {
          const cplx* fk = fhat.data() + g_.idx(iv, iz, ir, 0);
          const cplx* pk = phi_hat_.data() + g_.fidx(iz, ir, 0);
          for (int it = 0; it < nt; ++it)
            frow += fk[it].real() * pk[it].real() + fk[it].imag() * pk[it].imag();
        }
        field += w / double(nz) * frow;
        if (pert) {
          // equilibrium times phi: f_eq is z-uniform, so only the k_z = 0
          // potential row pairs with it
          const double feqv = feq_[std::size_t(iv) * nr + ir];
          const cplx* p0 = phi_hat_.data() + g_.fidx(0, ir, 0);
          double prow = 0.0;
          for (int it = 0; it < nt; ++it) prow += p0[it].real();
          field += w * feqv * prow;  // sum_z phi = k_z = 0 mode, unnormalized
        }
      }
    }
    d.mass = mass;
    d.energy = kin + field;
    return d;
  }

  // Initial condition: f_eq [1 + eps exp(-(r - r_p)^2 / delta) cos(k_n z + m theta)]
  // with delta = 4 delta_n0 / delta_Ti.  Perturbation states store f - f_eq.
  // Boundary r-rows are pinned to their boundary values (f_eq / zero).
  // Returned in z-Fourier space.
  State initial_state(double eps = 1e-6, int m = 5, int n = 1) const {
    const int nr = g_.nr, nt = g_.ntheta, nz = g_.nz, nv = g_.nv;
    const double delta = 4.0 * prof_.n0_shape.delta_r / prof_.ti_shape.delta_r;
    const double kn = 2.0 * M_PI * n / g_.L;
    State f(g_.size());
    const bool pert = form_ == DKFormulation::perturbation;
    for (int iv = 0; iv < nv; ++iv)
      for (int iz = 0; iz < nz; ++iz)
        for (int ir = 0; ir < nr; ++ir) {
          const double feqv = feq_[std::size_t(iv) * nr + ir];
          const double env =
              eps * std::exp(-std::pow(g_.r(ir) - prof_.r_p, 2) / delta);
          cplx* row = f.data() + g_.idx(iv, iz, ir, 0);
          const bool bnd = (ir == 0 || ir == nr - 1);
          for (int it = 0; it < nt; ++it) {
            const double pert_val =
                feqv * env * std::cos(kn * g_.z(iz) + m * g_.theta(it));
            if (bnd)
              row[it] = pert ? 0.0 : feqv;
            else
              row[it] = pert ? pert_val : feqv + pert_val;
          }
        }
    fft::fft_axis(f, {nv, nz, nr, nt}, 1);
    return f;
  }

  // Real-space max-norm of a z-Fourier state difference (the controller's
  // error measure is taken pointwise over all of phase space).
  double real_space_linf(const State& diff_hat) {
    norm_ws_ = diff_hat;
    fft::ifft_axis(norm_ws_, {g_.nv, g_.nz, g_.nr, g_.ntheta}, 1);
    double m = 0.0;
    for (const cplx& c : norm_ws_) {
      const double a = std::abs(c);
      if (a > m) m = a;
      if (!std::isfinite(a)) return std::numeric_limits<double>::quiet_NaN();
    }
    return m;
  }

  // Restore the z-Fourier Hermitian pairing (the state represents a real
  // field; round-off drift is re-centered after each accepted step).
  void hermitian_symmetrize(State& fhat) const {
    const int nz = g_.nz;
    const std::size_t block = std::size_t(g_.nr) * g_.ntheta;
    for (int iv = 0; iv < g_.nv; ++iv) {
      cplx* base = fhat.data() + g_.idx(iv, 0, 0, 0);
      for (std::size_t i = 0; i < block; ++i) base[i] = base[i].real();
      if (nz % 2 == 0) {
        cplx* nyq = base + std::size_t(nz / 2) * block;
        for (std::size_t i = 0; i < block; ++i) nyq[i] = nyq[i].real();
      }
      for (int iz = 1; iz < nz - iz; ++iz) {
        cplx* a = base + std::size_t(iz) * block;
        cplx* b = base + std::size_t(nz - iz) * block;
        for (std::size_t i = 0; i < block; ++i) {
          const cplx avg = 0.5 * (a[i] + std::conj(b[i]));
          a[i] = avg;
          b[i] = std::conj(avg);
        }
      }
    }
  }

  // f(r, theta) at z = 0 on the v-plane nearest v = 0, and the density
  // int f dv at z = 0 (equilibrium added back in the perturbation case).
  struct Snapshot {
    double t = 0;
    double v0 = 0;
    int nr = 0, ntheta = 0;
    std::vector<double> f_slice;  // nr x ntheta
    std::vector<double> density;  // nr x ntheta
  };

  Snapshot snapshot(const State& fhat, double t) const {
    const int nr = g_.nr, nt = g_.ntheta, nz = g_.nz, nv = g_.nv;
    Snapshot s;
    s.t = t;
    s.nr = nr;
    s.ntheta = nt;
    int iv0 = 0;
    for (int iv = 1; iv < nv; ++iv)
      if (std::abs(g_.v(iv)) < std::abs(g_.v(iv0))) iv0 = iv;
    s.v0 = g_.v(iv0);
    s.f_slice.assign(std::size_t(nr) * nt, 0.0);
    s.density.assign(std::size_t(nr) * nt, 0.0);
    const bool pert = form_ == DKFormulation::perturbation;
    // f(z = 0) = (1/nz) sum_k fhat_k
    for (int iv = 0; iv < nv; ++iv) {
      const double wv = g_.wv(iv);
      for (int iz = 0; iz < nz; ++iz) {
        const cplx* f = fhat.data() + g_.idx(iv, iz, 0, 0);
        for (std::size_t i = 0; i < std::size_t(nr) * nt; ++i) {
          const double val = f[i].real() / double(nz);
          s.density[i] += wv * val;
          if (iv == iv0) s.f_slice[i] += val;
        }
      }
      if (pert)
        for (int ir = 0; ir < nr; ++ir) {
          const double feqv = feq_[std::size_t(iv) * nr + ir];
          for (int it = 0; it < nt; ++it) {
            s.density[std::size_t(ir) * nt + it] += wv * feqv;
            if (iv == iv0) s.f_slice[std::size_t(ir) * nt + it] += feqv;
          }
        }
    }
    return s;
  }

 private:
  DKGrid g_;
  RadialProfiles prof_;
  DKFormulation form_;
  QNSolver qn_;
  std::vector<double> feq_, drfeq_, dvfeq_, ghost_lo_, ghost_hi_, kz_;
  double eq_mass_ = 0, eq_kin_ = 0;
  State charge_hat_, phi_hat_, phi_real_, dzphi_real_, dthphi_over_r_;
  State freal_, jwork_, norm_ws_;
  bool audit_ = false;
  std::array<double, 3> worst_ratio_ = {0.0, 0.0, 0.0};
  long audit_evals_ = 0;
};

// Spec'd free-function spellings.
inline State dk_initial_condition(const DKSolver& s, double eps = 1e-6, int m = 5,
                                  int n = 1) {
  return s.initial_state(eps, m, n);
}

// ---------------------------------------------------------------------------
// Time loop with fixed steps or the Richardson controller.
// ---------------------------------------------------------------------------

struct DKRunConfig {
  std::string method = "lawson_rk44";
  double tfinal = 3000.0;
  bool adaptive = true;
  double dt_fixed = 1.0;   // used when adaptive == false
  double tol = 1e-2;       // Richardson tolerance (absolute, real-space max)
  double dt0 = 1.0;
  double dt_max = 40.0;
  double safety = 0.8;
  int reject_cap = 50;
  bool classical_factor = false;
  double blowup_factor = 1e6;
  long max_steps = 100000000L;
  std::vector<double> snapshot_times;
};

struct DKDiagRow {
  double t = 0;
  double dt = 0;
  int accepted = 1;
  double elec_energy = 0;
  double mass_rel_err = 0;
  double energy_rel_err = 0;
};

// One controller iteration: the step size tried at time t, the Richardson
// error estimate, and whether the step was accepted.
struct DKTrial {
  double t = 0, dt_tried = 0, e = 0;
  int accepted = 0;
};

struct DKRunResult {
  std::vector<DKDiagRow> rows;
  RunOutcome outcome = RunOutcome::completed;
  State final_state;
  double t = 0;
  long accepted = 0, rejected = 0;
  std::vector<DKSolver::Snapshot> snapshots;
  std::vector<DKTrial> trials;  // adaptive runs only
};

inline DKRunResult dk_run(DKSolver& solver, State f0, const DKRunConfig& cfg) {
  if (!(cfg.tfinal > 0.0)) throw ValidationError("dk_run: tfinal must be positive");
  auto integ = make_integrator(cfg.method);
  DiagonalPropagator A(solver.propagator_symbols());
  Rhs F = [&solver](double t, const State& u, State& du) { solver.rhs(t, u, du); };
  StepFn step = [&](double tn, const State& u, double dt, State& out) {
    integ->step(A, F, tn, u, dt, out);
  };

  DKRunResult res;
  res.final_state = std::move(f0);
  const double norm0 = std::sqrt(l2_norm_sq(res.final_state));

  DKDiagnostics d0 = solver.diagnostics(res.final_state);
  const double mass0 = d0.mass, energy0 = d0.energy;
  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
  };
  res.rows.push_back({0.0, 0.0, 1, d0.elec_energy, 0.0, 0.0});

  std::size_t next_snap = 0;
  auto maybe_snapshot = [&](double t) {
    while (next_snap < cfg.snapshot_times.size() &&
           t >= cfg.snapshot_times[next_snap] - 1e-12) {
      res.snapshots.push_back(solver.snapshot(res.final_state, t));
      ++next_snap;
    }
  };
  maybe_snapshot(0.0);

  double last_elec = d0.elec_energy, last_mass_err = 0.0, last_energy_err = 0.0;

  auto after_accept = [&](double t, double dt_taken) -> bool {
    solver.hermitian_symmetrize(res.final_state);
    DKDiagnostics d = solver.diagnostics(res.final_state);
    last_elec = d.elec_energy;
    last_mass_err = rel(d.mass, mass0);
    last_energy_err = rel(d.energy, energy0);
    res.rows.push_back({t, dt_taken, 1, last_elec, last_mass_err, last_energy_err});
    maybe_snapshot(t);
    const double nrm = std::sqrt(l2_norm_sq(res.final_state));
    if (!std::isfinite(nrm) || nrm > cfg.blowup_factor * std::max(norm0, 1e-300)) {
      res.outcome = RunOutcome::blow_up;
      return false;
    }
    return true;
  };

  if (!cfg.adaptive) {
    if (!(cfg.dt_fixed > 0.0)) throw ValidationError("dk_run: dt must be positive");
    State next;
    for (long n = 0; res.t < cfg.tfinal - 1e-12 && n < cfg.max_steps; ++n) {
      const double dt = std::min(cfg.dt_fixed, cfg.tfinal - res.t);
      step(res.t, res.final_state, dt, next);
      std::swap(res.final_state, next);
      res.t += dt;
      ++res.accepted;
      if (!after_accept(res.t, dt)) return res;
    }
    return res;
  }

  ControllerConfig cc;
  cc.tol = cfg.tol;
  cc.safety = cfg.safety;
  cc.p = integ->order();
  cc.dt0 = cfg.dt0;
  cc.dt_max = cfg.dt_max;
  cc.classical_factor = cfg.classical_factor;
  cc.reject_cap = cfg.reject_cap;
  cc.on_trial = [&res](double t, double dt_tried, double e, bool accepted) {
    res.trials.push_back({t, dt_tried, e, accepted ? 1 : 0});
  };
  NormFn norm = [&solver](const State& d) { return solver.real_space_linf(d); };
  StepController ctl(step, cc, norm);

  for (long n = 0; res.t < cfg.tfinal - 1e-12 && n < cfg.max_steps; ++n) {
    const double t_before = res.t;
    auto a = ctl.advance(res.t, res.final_state, cfg.tfinal);
    if (a.outcome == RunOutcome::rejection_cap) {
      res.outcome = RunOutcome::rejection_cap;
      res.rejected += a.rejections;
      res.rows.push_back(
          {t_before, ctl.dt(), 0, last_elec, last_mass_err, last_energy_err});
      break;
    }
    if (a.dt_taken == 0.0) break;  // landed on tfinal
    res.accepted += 1;
    res.rejected += a.rejections;
    for (long r = 0; r < a.rejections; ++r)
      res.rows.push_back(
          {t_before, 0.0, 0, last_elec, last_mass_err, last_energy_err});
    if (!after_accept(res.t, a.dt_taken)) return res;
  }
  return res;
}

}  // namespace vlexp
