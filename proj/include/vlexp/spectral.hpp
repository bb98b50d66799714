#pragma once

// Spectral helpers for periodic directions: signed wavenumber tables and the
// 1D Poisson solve for the electric field, E' = rho - 1 with zero-mean gauge.

#include <cmath>
#include <numbers>
#include <vector>

#include "fft.hpp"
#include "util.hpp"

namespace vlexp {

// Signed wavenumbers 2*pi*m/L in FFT index order.  For even n the unpaired
// Nyquist mode has no well-defined sign for odd-order derivatives and is
// zeroed.
inline std::vector<double> fourier_k(int n, double L) {
  if (n <= 0 || L <= 0.0) throw ValidationError("fourier_k: need n > 0 and L > 0");
  std::vector<double> k(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int m = (i <= (n - 1) / 2) ? i : i - n;
    if (n % 2 == 0 && i == n / 2) m = 0;
    k[static_cast<std::size_t>(i)] = 2.0 * std::numbers::pi * m / L;
  }
  return k;
}

// Spectral Poisson solve in k-space: E_hat_k = rho_hat_k / (i k) for k != 0,
// E_hat_0 = 0 (zero-mean field).  Works for any consistent normalization of
// rho_hat; with the unnormalized forward convention, *mean_deficit receives
// the compatibility defect mean(rho) - 1 (it is reported, never absorbed).
inline State poisson_E_hat(const State& rho_hat, double L,
                           double* mean_deficit = nullptr) {
  const int n = static_cast<int>(rho_hat.size());
  const auto k = fourier_k(n, L);
  State e(rho_hat.size());
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    e[idx] = (k[idx] == 0.0) ? cplx(0.0) : rho_hat[idx] / cplx(0.0, k[idx]);
  }
  if (mean_deficit) *mean_deficit = rho_hat[0].real() / n - 1.0;
  return e;
}

// Real-space convenience wrapper of the spectral solve.
inline std::vector<double> poisson_E(const std::vector<double>& rho, double L,
                                     double* mean_deficit = nullptr) {
  const int n = static_cast<int>(rho.size());
  State work(rho.begin(), rho.end());
  fft::fft_axis(work, {n}, 0);
  State e_hat = poisson_E_hat(work, L, mean_deficit);
  fft::ifft_axis(e_hat, {n}, 0);
  std::vector<double> e(rho.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = e_hat[i].real();
  return e;
}

}  // namespace vlexp
