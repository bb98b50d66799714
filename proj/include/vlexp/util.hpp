#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace vlexp {

using cplx = std::complex<double>;
using State = std::vector<cplx>;

// Bad user input (config values, CLI arguments, malformed grids).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// How a time loop ended.  Numerical trouble is data, not an exception.
enum class RunOutcome { completed, blow_up, rejection_cap };

inline const char* to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::completed: return "completed";
    case RunOutcome::blow_up: return "blow_up";
    case RunOutcome::rejection_cap: return "rejection_cap";
  }
  return "?";
}

// Fixed-order pairwise reduction.  Used for all physics sums so that
// diagnostics are deterministic and accurate on multi-million point grids.
template <class T>
T pairwise_sum(const T* x, std::size_t n) {
  if (n <= 32) {
    T acc{};
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
  }
  std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

template <class T>
T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(v.data(), v.size());
}

// Least-squares straight line through (x_i, y_i).
struct LineFit {
  double slope = 0, intercept = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("fit_line: need two or more points");
  double n = double(x.size());
  double sx = pairwise_sum(x), sy = pairwise_sum(y);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double det = n * sxx - sx * sx;
  LineFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

// Indices of interior local maxima (strictly above the left neighbour, at
// least as large as the right one, so plateaus count once).
inline std::vector<std::size_t> local_maxima(const std::vector<double>& y) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) idx.push_back(i);
  return idx;
}

// Exponential rate of y(t) ~ C e^{rate t}: least-squares line through
// (t_i, log y_i) restricted to t in [t0, t1] (and y_i > 0).
inline double fit_log_rate(const std::vector<double>& t, const std::vector<double>& y,
                           double t0, double t1) {
  if (t.size() != y.size()) throw ValidationError("fit_log_rate: length mismatch");
  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t0 && t[i] <= t1 && y[i] > 0.0) {
      ts.push_back(t[i]);
      ls.push_back(std::log(y[i]));
    }
  return fit_line(ts, ls).slope;
}

// Exponential rate of an oscillating series fitted through its local maxima
// only (the envelope), restricted to t in [t0, t1].
inline double peak_fit_rate(const std::vector<double>& t, const std::vector<double>& y,
                            double t0, double t1) {
  if (t.size() != y.size()) throw ValidationError("peak_fit_rate: length mismatch");
  std::vector<double> ts, ls;
  for (std::size_t i : local_maxima(y))
    if (t[i] >= t0 && t[i] <= t1 && y[i] > 0.0) {
      ts.push_back(t[i]);
      ls.push_back(std::log(y[i]));
    }
  if (ts.size() < 2) throw ValidationError("peak_fit_rate: fewer than two peaks in window");
  return fit_line(ts, ls).slope;
}

inline bool all_finite(const State& u) {
  for (const cplx& c : u)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

inline double linf_norm(const State& u) {
  double m = 0;
  for (const cplx& c : u) m = std::max(m, std::abs(c));
  return m;
}

inline double l2_norm_sq(const State& u) {
  std::vector<double> sq(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) sq[i] = std::norm(u[i]);
  return pairwise_sum(sq);
}

}  // namespace vlexp
