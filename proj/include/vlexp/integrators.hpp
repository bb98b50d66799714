#pragma once

// Time steppers for u' = Au + F(t, u) with A diagonal in spectral space:
// a generic Lawson stepper driven by any explicit Butcher tableau, and the
// hand-coded exponential Runge-Kutta methods (exponential Euler, ExpRK22,
// Krogstad, Cox-Matthews, Hochbruck-Ostermann).
//
// Lawson, stage l and update (c, a, b from the underlying tableau):
//   U_l     = e^{c_l dt A} u_n + dt sum_j a_{l,j} e^{(c_l - c_j) dt A} F_j
//   u_{n+1} = e^{dt A} u_n + dt sum_j b_j e^{(1 - c_j) dt A} F_j
// with F_j = F(t_n + c_j dt, U_j).
//
// Exponential RK, with G_j = F(t_n + c_j dt, U_j) + A u_n:
//   U_l     = u_n + dt sum_j a_{l,j}(dt A) G_j
//   u_{n+1} = u_n + dt sum_j b_j(dt A) G_j
// where the coefficients a_{l,j}, b_j are fixed combinations of
// phi_m(c dt A) specific to each method.

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "propagator.hpp"
#include "tableau.hpp"
#include "util.hpp"

namespace vlexp {

// Right-hand side callback; writes F(t, u) into du (resized by the callee).
using Rhs = std::function<void(double t, const State& u, State& du)>;

class Integrator {
public:
  virtual ~Integrator() = default;
  virtual void step(DiagonalPropagator& A, const Rhs& F, double tn, const State& un,
                    double dt, State& out) = 0;
  const std::string& name() const { return name_; }
  int order() const { return order_; }
  int stages() const { return stages_; }

protected:
  Integrator(std::string name, int order, int stages)
      : name_(std::move(name)), order_(order), stages_(stages) {}

private:
  std::string name_;
  int order_;
  int stages_;
};

namespace detail {

inline void resize_stage_workspace(std::vector<State>& w, int s, std::size_t n) {
  w.resize(static_cast<std::size_t>(s));
  for (auto& v : w) v.resize(n);
}

class LawsonIntegrator final : public Integrator {
public:
  explicit LawsonIntegrator(const ButcherTableau& tb)
      : Integrator("lawson_" + tb.name, tb.order, tb.stages()), tb_(tb) {}

  void step(DiagonalPropagator& A, const Rhs& F, double tn, const State& un, double dt,
            State& out) override {
    const std::size_t n = un.size();
    const int s = tb_.stages();
    resize_stage_workspace(fj_, s, n);
    stage_.resize(n);

    for (int l = 0; l < s; ++l) {
      auto ec = A.exp_table(tb_.c[l] * dt);
      for (std::size_t i = 0; i < n; ++i) stage_[i] = (*ec)[i] * un[i];
      for (int j = 0; j < l; ++j) {
        if (tb_.a[l][j] == 0.0) continue;
        auto elj = A.exp_table((tb_.c[l] - tb_.c[j]) * dt);
        const double w = dt * tb_.a[l][j];
        const State& fj = fj_[j];
        for (std::size_t i = 0; i < n; ++i) stage_[i] += w * (*elj)[i] * fj[i];
      }
      F(tn + tb_.c[l] * dt, stage_, fj_[l]);
    }

    out.resize(n);
    auto e1 = A.exp_table(dt);
    for (std::size_t i = 0; i < n; ++i) out[i] = (*e1)[i] * un[i];
    for (int j = 0; j < s; ++j) {
      if (tb_.b[j] == 0.0) continue;
      auto e1j = A.exp_table((1.0 - tb_.c[j]) * dt);
      const double w = dt * tb_.b[j];
      const State& fj = fj_[j];
      for (std::size_t i = 0; i < n; ++i) out[i] += w * (*e1j)[i] * fj[i];
    }
  }

private:
  const ButcherTableau& tb_;
  std::vector<State> fj_;
  State stage_;
};

class ExpEulerIntegrator final : public Integrator {
public:
  ExpEulerIntegrator() : Integrator("exp_euler", 1, 1) {}

  void step(DiagonalPropagator& A, const Rhs& F, double tn, const State& un, double dt,
            State& out) override {
    const std::size_t n = un.size();
    F(tn, un, f_);
    auto e1 = A.exp_table(dt);
    auto p1 = A.phi_table(1, dt);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (*e1)[i] * un[i] + dt * (*p1)[i] * f_[i];
  }

private:
  State f_;
};

enum class ExpRkKind { exp_rk22, krogstad, cox_matthews, hochbruck_ostermann };

class ExpRkIntegrator final : public Integrator {
public:
  ExpRkIntegrator(ExpRkKind kind, std::string name, int order, int stages)
      : Integrator(std::move(name), order, stages), kind_(kind) {}

  void step(DiagonalPropagator& A, const Rhs& F, double tn, const State& un, double dt,
            State& out) override {
    const std::size_t n = un.size();
    const State& d = A.symbols();
    resize_stage_workspace(g_, stages(), n);
    stage_.resize(n);
    out.resize(n);

    // G_j = F(t_n + c_j dt, U_j) + A u_n; the A u_n part is stage-independent.
    aun_.resize(n);
    for (std::size_t i = 0; i < n; ++i) aun_[i] = d[i] * un[i];
    auto eval = [&](int j, double c, const State& u) {
      F(tn + c * dt, u, g_[j]);
      for (std::size_t i = 0; i < n; ++i) g_[j][i] += aun_[i];
    };

    switch (kind_) {
      case ExpRkKind::exp_rk22: {
        // c = (0, 1); a21 = phi_1(dt A); b = (phi_1 - phi_2, phi_2)(dt A).
        auto p1 = A.phi_table(1, dt);
        auto p2 = A.phi_table(2, dt);
        eval(0, 0.0, un);
        for (std::size_t i = 0; i < n; ++i) stage_[i] = un[i] + dt * (*p1)[i] * g_[0][i];
        eval(1, 1.0, stage_);
        for (std::size_t i = 0; i < n; ++i)
          out[i] = un[i] + dt * (((*p1)[i] - (*p2)[i]) * g_[0][i] + (*p2)[i] * g_[1][i]);
        break;
      }
      case ExpRkKind::krogstad: {
        // c = (0, 1/2, 1/2, 1); coefficients in phi_m(c dt A), h suffix = half node.
        auto p1h = A.phi_table(1, 0.5 * dt), p2h = A.phi_table(2, 0.5 * dt);
        auto p1 = A.phi_table(1, dt), p2 = A.phi_table(2, dt), p3 = A.phi_table(3, dt);
        eval(0, 0.0, un);
        for (std::size_t i = 0; i < n; ++i)
          stage_[i] = un[i] + dt * 0.5 * (*p1h)[i] * g_[0][i];
        eval(1, 0.5, stage_);
        for (std::size_t i = 0; i < n; ++i)
          stage_[i] = un[i] + dt * ((0.5 * (*p1h)[i] - (*p2h)[i]) * g_[0][i] +
                                    (*p2h)[i] * g_[1][i]);
        eval(2, 0.5, stage_);
        for (std::size_t i = 0; i < n; ++i)
          stage_[i] = un[i] + dt * (((*p1)[i] - 2.0 * (*p2)[i]) * g_[0][i] +
                                    2.0 * (*p2)[i] * g_[2][i]);
        eval(3, 1.0, stage_);
        for (std::size_t i = 0; i < n; ++i) {
          const cplx b1 = (*p1)[i] - 3.0 * (*p2)[i] + 4.0 * (*p3)[i];
          const cplx b23 = 2.0 * (*p2)[i] - 4.0 * (*p3)[i];
          const cplx b4 = -(*p2)[i] + 4.0 * (*p3)[i];
          out[i] = un[i] + dt * (b1 * g_[0][i] + b23 * (g_[1][i] + g_[2][i]) + b4 * g_[3][i]);
        }
        break;
      }
      case ExpRkKind::cox_matthews: {
        // c = (0, 1/2, 1/2, 1); a41 = phi_1(dt A / 2)(e^{dt A / 2} - 1) / 2.
        auto p1h = A.phi_table(1, 0.5 * dt);
        auto eh = A.exp_table(0.5 * dt);
        auto p1 = A.phi_table(1, dt), p2 = A.phi_table(2, dt), p3 = A.phi_table(3, dt);
        eval(0, 0.0, un);
        for (std::size_t i = 0; i < n; ++i)
          stage_[i] = un[i] + dt * 0.5 * (*p1h)[i] * g_[0][i];
        eval(1, 0.5, stage_);
        for (std::size_t i = 0; i < n; ++i)
          stage_[i] = un[i] + dt * 0.5 * (*p1h)[i] * g_[1][i];
        eval(2, 0.5, stage_);
        for (std::size_t i = 0; i < n; ++i) {
          const cplx a41 = 0.5 * (*p1h)[i] * ((*eh)[i] - 1.0);
          stage_[i] = un[i] + dt * (a41 * g_[0][i] + (*p1h)[i] * g_[2][i]);
        }
        eval(3, 1.0, stage_);
        for (std::size_t i = 0; i < n; ++i) {
          const cplx b1 = (*p1)[i] - 3.0 * (*p2)[i] + 4.0 * (*p3)[i];
          const cplx b23 = 2.0 * (*p2)[i] - 4.0 * (*p3)[i];
          const cplx b4 = 4.0 * (*p3)[i] - (*p2)[i];
          out[i] = un[i] + dt * (b1 * g_[0][i] + b23 * (g_[1][i] + g_[2][i]) + b4 * g_[3][i]);
        }
        break;
      }
      case ExpRkKind::hochbruck_ostermann: {
        // c = (0, 1/2, 1/2, 1, 1/2); fifth stage couples both node families.
        auto p1h = A.phi_table(1, 0.5 * dt), p2h = A.phi_table(2, 0.5 * dt),
             p3h = A.phi_table(3, 0.5 * dt);
        auto p1 = A.phi_table(1, dt), p2 = A.phi_table(2, dt), p3 = A.phi_table(3, dt);
        eval(0, 0.0, un);
        for (std::size_t i = 0; i < n; ++i)
          stage_[i] = un[i] + dt * 0.5 * (*p1h)[i] * g_[0][i];
        eval(1, 0.5, stage_);
        for (std::size_t i = 0; i < n; ++i)
          stage_[i] = un[i] + dt * ((0.5 * (*p1h)[i] - (*p2h)[i]) * g_[0][i] +
                                    (*p2h)[i] * g_[1][i]);
        eval(2, 0.5, stage_);
        for (std::size_t i = 0; i < n; ++i)
          stage_[i] = un[i] + dt * (((*p1)[i] - 2.0 * (*p2)[i]) * g_[0][i] +
                                    (*p2)[i] * (g_[1][i] + g_[2][i]));
        eval(3, 1.0, stage_);
        for (std::size_t i = 0; i < n; ++i) {
          const cplx a52 =
              0.5 * (*p2h)[i] - (*p3)[i] + 0.25 * (*p2)[i] - 0.5 * (*p3h)[i];
          const cplx a54 = 0.25 * (*p2h)[i] - a52;
          const cplx a51 = 0.5 * (*p1h)[i] - 2.0 * a52 - a54;
          stage_[i] = un[i] + dt * (a51 * g_[0][i] + a52 * (g_[1][i] + g_[2][i]) +
                                    a54 * g_[3][i]);
        }
        eval(4, 0.5, stage_);
        for (std::size_t i = 0; i < n; ++i) {
          const cplx b1 = (*p1)[i] - 3.0 * (*p2)[i] + 4.0 * (*p3)[i];
          const cplx b4 = -(*p2)[i] + 4.0 * (*p3)[i];
          const cplx b5 = 4.0 * (*p2)[i] - 8.0 * (*p3)[i];
          out[i] = un[i] + dt * (b1 * g_[0][i] + b4 * g_[3][i] + b5 * g_[4][i]);
        }
        break;
      }
    }
  }

private:
  ExpRkKind kind_;
  std::vector<State> g_;
  State stage_;
  State aun_;
};

}  // namespace detail

inline const std::vector<std::string>& integrator_names() {
  static const std::vector<std::string> names = {
      "lawson_rk44",  "lawson_rk33",   "lawson_rk32_best",
      "lawson_rk22",  "exp_euler",     "exp_rk22",
      "krogstad",     "cox_matthews",  "hochbruck_ostermann"};
  return names;
}

inline std::unique_ptr<Integrator> make_integrator(std::string_view name) {
  using detail::ExpRkIntegrator;
  using detail::ExpRkKind;
  if (name.rfind("lawson_", 0) == 0) {
    const ButcherTableau* tb = find_tableau(name.substr(7));
    if (tb) return std::make_unique<detail::LawsonIntegrator>(*tb);
  }
  if (name == "exp_euler") return std::make_unique<detail::ExpEulerIntegrator>();
  if (name == "exp_rk22")
    return std::make_unique<ExpRkIntegrator>(ExpRkKind::exp_rk22, "exp_rk22", 2, 2);
  if (name == "krogstad")
    return std::make_unique<ExpRkIntegrator>(ExpRkKind::krogstad, "krogstad", 4, 4);
  if (name == "cox_matthews")
    return std::make_unique<ExpRkIntegrator>(ExpRkKind::cox_matthews, "cox_matthews", 4, 4);
  if (name == "hochbruck_ostermann")
    return std::make_unique<ExpRkIntegrator>(ExpRkKind::hochbruck_ostermann,
                                             "hochbruck_ostermann", 4, 5);
  throw ValidationError("unknown integrator '" + std::string(name) +
                        "'; expected one of: lawson_rk44 lawson_rk33 lawson_rk32_best "
                        "lawson_rk22 exp_euler exp_rk22 krogstad cox_matthews "
                        "hochbruck_ostermann");
}

// One Lawson step driven by an arbitrary explicit tableau.
inline State lawson_step(const ButcherTableau& tb, DiagonalPropagator& A, const Rhs& F,
                         double tn, const State& un, double dt) {
  detail::LawsonIntegrator integ(tb);
  State out;
  integ.step(A, F, tn, un, dt, out);
  return out;
}

// One step of a named exponential Runge-Kutta method (not exponential Euler).
inline State exp_step(std::string_view method, DiagonalPropagator& A, const Rhs& F,
                      double tn, const State& un, double dt) {
  if (method.rfind("lawson_", 0) == 0 || method == "exp_euler")
    throw ValidationError("exp_step expects one of: exp_rk22 krogstad cox_matthews "
                          "hochbruck_ostermann");
  auto integ = make_integrator(method);
  State out;
  integ->step(A, F, tn, un, dt, out);
  return out;
}

// u_{n+1} = e^{dt A} u_n + dt phi_1(dt A) F(t_n, u_n)
inline State exp_euler_step(DiagonalPropagator& A, const Rhs& F, const State& un,
                            double dt, double tn = 0.0) {
  detail::ExpEulerIntegrator integ;
  State out;
  integ.step(A, F, tn, un, dt, out);
  return out;
}

}  // namespace vlexp
