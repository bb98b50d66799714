// Adaptive step-size control by Richardson extrapolation.
//
// One controller iteration advances the solution with a single step of size
// dt and with two steps of size dt/2, forms the extrapolated solution
//
//   u_R = (2^{p+1} u_half2 - u_full) / (2^{p+1} - 1),
//
// and estimates the local error as e = ||u_R - u_full||.  The step is
// accepted when e <= tol, the state advances with u_half2, and the next step
// size is
//
//   dt_new = min(dt_max, safety * dt * (tol / e)^{1/(p+1)}).
//
// A rejected step keeps the state and retries with the shrunken dt.  The
// factor 2^{p+1} treats the integrator as having observed order p + 1 in the
// step doubling sense for a method of classical order p applied over the two
// half steps; passing classical_factor = true switches the extrapolation
// weight to 2^p for methods whose error constant follows the classical
// convention.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "vlexp/util.hpp"

namespace vlexp {

// Advance-one-step callback: out = solution at tn + dt starting from u at tn.
using StepFn = std::function<void(double tn, const State& u, double dt, State& out)>;
// Norm used for the error estimate (defaults to the complex infinity norm).
using NormFn = std::function<double(const State&)>;

struct RichardsonResult {
  State u_full;   // one step of size dt
  State u_half2;  // two steps of size dt/2 (the solution that advances)
  State u_R;      // extrapolated combination
  double e = 0;   // error estimate ||u_R - u_full||
};

inline double default_error_norm(const State& diff) { return linf_norm(diff); }

inline RichardsonResult richardson_step(const StepFn& step, double tn, const State& un,
                                        double dt, int p, bool classical_factor = false,
                                        const NormFn& norm = default_error_norm) {
  if (!(dt > 0.0)) throw ValidationError("richardson_step: dt must be positive");
  if (p < 1) throw ValidationError("richardson_step: order must be >= 1");

  RichardsonResult r;
  step(tn, un, dt, r.u_full);
  State mid;
  step(tn, un, 0.5 * dt, mid);
  step(tn + 0.5 * dt, mid, 0.5 * dt, r.u_half2);

  const double w = classical_factor ? std::ldexp(1.0, p) : std::ldexp(1.0, p + 1);
  r.u_R.resize(r.u_half2.size());
  State diff(r.u_half2.size());
  for (std::size_t i = 0; i < r.u_R.size(); ++i) {
    r.u_R[i] = (w * r.u_half2[i] - r.u_full[i]) / (w - 1.0);
    diff[i] = r.u_R[i] - r.u_full[i];
  }
  // Non-finite sub-steps must read as "reject", not slip through a norm that
  // ignores NaN comparisons.
  r.e = all_finite(diff) ? norm(diff) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

inline double propose_dt(double e, double tol, double dt, int p, double safety,
                         double dt_max) {
  if (!(e > 0.0)) return dt_max;  // exact step (or zero estimate): open the throttle
  return std::min(dt_max, safety * dt * std::pow(tol / e, 1.0 / double(p + 1)));
}

// Default ceiling on the adaptive step for each integrator family: 11 for
// second-order methods (10 on fine grids), 30 for third-order methods and
// the RK(3,2)-best pair, 40 for fourth-order methods.  All overridable.
inline double default_dt_max(const std::string& method, bool fine_grid = false) {
  if (method == "lawson_rk32_best") return 30.0;
  int order = 4;
  if (method == "lawson_rk22" || method == "lawson_heun" || method == "exp_rk22")
    order = 2;
  else if (method == "lawson_rk33")
    order = 3;
  switch (order) {
    case 2: return fine_grid ? 10.0 : 11.0;
    case 3: return 30.0;
    default: return 40.0;
  }
}

struct ControllerConfig {
  double tol = 1e-2;       // absolute tolerance on the extrapolated error
  double safety = 0.8;     // shrink factor in the new-step formula
  int p = 4;               // classical order of the wrapped integrator
  double dt0 = 1.0;        // initial step
  double dt_max = 40.0;    // hard ceiling on dt
  bool classical_factor = false;
  int reject_cap = 50;     // consecutive rejections before giving up
  // Optional per-trial observer (t, dt tried, error estimate, accepted),
  // called once per controller iteration; feeds the run trace.
  std::function<void(double, double, double, bool)> on_trial;
};

struct ControllerStats {
  long accepted = 0;
  long rejected = 0;
};

// Stateful accept/reject loop around richardson_step.  Each call to advance()
// performs controller iterations until one step is accepted (or the rejection
// cap trips), updates u/t in place, and reports the dt actually taken.
class StepController {
 public:
  StepController(StepFn step, ControllerConfig cfg, NormFn norm = default_error_norm)
      : step_(std::move(step)), cfg_(cfg), norm_(std::move(norm)), dt_(cfg.dt0) {
    if (!(cfg_.tol > 0.0)) throw ValidationError("StepController: tol must be positive");
    if (!(cfg_.dt0 > 0.0)) throw ValidationError("StepController: dt0 must be positive");
    if (!(cfg_.dt_max > 0.0)) throw ValidationError("StepController: dt_max must be positive");
  }

  struct Advance {
    RunOutcome outcome = RunOutcome::completed;
    double dt_taken = 0;  // size of the accepted step
    double e = 0;         // accepted-error estimate
    long rejections = 0;  // rejections spent inside this call
  };

  // Advance u from t by one accepted step, capping dt so t never overshoots
  // t_end.  On rejection_cap the state is left untouched.
  Advance advance(double& t, State& u, double t_end) {
    Advance out;
    int consecutive = 0;
    while (true) {
      const double dt_try = std::min(dt_, t_end - t);
      if (!(dt_try > 0.0)) {
        out.outcome = RunOutcome::completed;
        return out;
      }
      RichardsonResult r =
          richardson_step(step_, t, u, dt_try, cfg_.p, cfg_.classical_factor, norm_);
      const bool accept = std::isfinite(r.e) && r.e <= cfg_.tol;
      if (cfg_.on_trial) cfg_.on_trial(t, dt_try, r.e, accept);
      if (accept) {
        t += dt_try;
        u = std::move(r.u_half2);
        dt_ = propose_dt(r.e, cfg_.tol, dt_try, cfg_.p, cfg_.safety, cfg_.dt_max);
        ++stats_.accepted;
        out.dt_taken = dt_try;
        out.e = r.e;
        return out;
      }
      ++stats_.rejected;
      ++out.rejections;
      if (++consecutive >= cfg_.reject_cap) {
        out.outcome = RunOutcome::rejection_cap;
        return out;
      }
      dt_ = std::isfinite(r.e) ? propose_dt(r.e, cfg_.tol, dt_try, cfg_.p, cfg_.safety,
                                            cfg_.dt_max)
                               : 0.5 * dt_try;  // non-finite estimate: just halve
    }
  }

  double dt() const { return dt_; }
  void set_dt(double dt) {
    if (!(dt > 0.0)) throw ValidationError("StepController: dt must be positive");
    dt_ = dt;
  }
  const ControllerStats& stats() const { return stats_; }
  const ControllerConfig& config() const { return cfg_; }

 private:
  StepFn step_;
  ControllerConfig cfg_;
  NormFn norm_;
  double dt_;
  ControllerStats stats_;
};

}  // namespace vlexp
