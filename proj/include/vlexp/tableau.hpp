#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "vlexp/util.hpp"

namespace vlexp {

// Explicit Runge-Kutta coefficients.  a is strictly lower triangular (stored
// dense), c must equal the row sums of a, and the b weights sum to one.
struct ButcherTableau {
  std::string name;
  int order = 0;
  std::vector<std::vector<double>> a;
  std::vector<double> b, c;

  int stages() const { return int(b.size()); }

  void validate() const {
    int s = stages();
    if (s < 1 || order < 1) throw ValidationError(name + ": empty tableau");
    if (int(a.size()) != s || int(c.size()) != s)
      throw ValidationError(name + ": inconsistent tableau sizes");
    double bsum = 0;
    for (int l = 0; l < s; ++l) {
      if (int(a[l].size()) != s) throw ValidationError(name + ": ragged a");
      double csum = 0;
      for (int j = 0; j < s; ++j) {
        if (j >= l && a[l][j] != 0.0)
          throw ValidationError(name + ": not strictly lower triangular");
        csum += a[l][j];
      }
      if (std::abs(csum - c[l]) > 1e-14)
        throw ValidationError(name + ": c does not match row sums");
      bsum += b[l];
    }
    if (std::abs(bsum - 1.0) > 1e-14)
      throw ValidationError(name + ": weights do not sum to 1");
  }
};

namespace detail {
inline ButcherTableau make_tableau(std::string name, int order,
                                   std::vector<std::vector<double>> a,
                                   std::vector<double> b, std::vector<double> c) {
  ButcherTableau t{std::move(name), order, std::move(a), std::move(b), std::move(c)};
  t.validate();
  return t;
}
}  // namespace detail

// Classic four stage, fourth order method.
inline const ButcherTableau& rk44() {
  static const ButcherTableau t = detail::make_tableau(
      "rk44", 4,
      {{0, 0, 0, 0}, {0.5, 0, 0, 0}, {0, 0.5, 0, 0}, {0, 0, 1, 0}},
      {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6}, {0, 0.5, 0.5, 1});
  return t;
}

// Classic three stage, third order method.
inline const ButcherTableau& rk33() {
  static const ButcherTableau t = detail::make_tableau(
      "rk33", 3, {{0, 0, 0}, {0.5, 0, 0}, {-1, 2, 0}},
      {1.0 / 6, 2.0 / 3, 1.0 / 6}, {0, 0.5, 1});
  return t;
}

// Three stage, second order method tuned for imaginary-axis stability
// (|R(iy)| <= 1 up to y = 2, the three-stage optimum).
inline const ButcherTableau& rk32_best() {
  static const ButcherTableau t = detail::make_tableau(
      "rk32_best", 2, {{0, 0, 0}, {0.5, 0, 0}, {0, 0.5, 0}},
      {0, 0, 1}, {0, 0.5, 0.5});
  return t;
}

// Explicit midpoint method.
inline const ButcherTableau& rk22() {
  static const ButcherTableau t = detail::make_tableau(
      "rk22", 2, {{0, 0}, {0.5, 0}}, {0, 1}, {0, 0.5});
  return t;
}

inline const std::vector<const ButcherTableau*>& tableau_registry() {
  static const std::vector<const ButcherTableau*> reg = {
      &rk44(), &rk33(), &rk32_best(), &rk22()};
  return reg;
}

inline const ButcherTableau* find_tableau(std::string_view name) {
  for (const ButcherTableau* t : tableau_registry())
    if (t->name == name) return t;
  return nullptr;
}

// Stability function R(z) of the explicit method, evaluated by running one
// step on u' = z u with u0 = 1 (identical to the stability polynomial).
inline cplx rk_stability_function(const ButcherTableau& t, cplx z) {
  int s = t.stages();
  std::vector<cplx> u(s);
  for (int l = 0; l < s; ++l) {
    cplx acc = 1.0;
    for (int j = 0; j < l; ++j) acc += z * t.a[l][j] * u[j];
    u[l] = acc;
  }
  cplx r = 1.0;
  for (int j = 0; j < s; ++j) r += z * t.b[j] * u[j];
  return r;
}

// Aligned text dump, one stage per row: c | a..., then the b row.
inline std::string format_tableau(const ButcherTableau& t) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%10.6g", v);
    return std::string(buf);
  };
  std::string out = t.name + " (order " + std::to_string(t.order) + ")\n";
  for (int l = 0; l < t.stages(); ++l) {
    out += num(t.c[l]) + " |";
    for (int j = 0; j < l; ++j) out += num(t.a[l][j]);
    out += '\n';
  }
  out += std::string(10, '-') + " +" + std::string(10 * t.stages(), '-') + '\n';
  out += std::string(10, ' ') + " |";
  for (int j = 0; j < t.stages(); ++j) out += num(t.b[j]);
  out += '\n';
  return out;
}

}  // namespace vlexp
