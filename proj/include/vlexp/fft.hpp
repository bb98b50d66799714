#pragma once

// Thin FFTW wrapper: cached many-transform plans (created once per layout,
// executed on any array via the new-array interface) and an axis-wise
// transform for row-major multi-dimensional complex fields.
// Forward transforms are unnormalized; inverse transforms scale by 1/n.

#include <fftw3.h>

#include <map>
#include <numeric>
#include <vector>

#include "util.hpp"

namespace vlexp::fft {

namespace detail {

struct PlanKey {
  int n, howmany, stride, dist, sign;
  friend bool operator<(const PlanKey& a, const PlanKey& b) {
    return std::tie(a.n, a.howmany, a.stride, a.dist, a.sign) <
           std::tie(b.n, b.howmany, b.stride, b.dist, b.sign);
  }
};

inline fftw_plan plan_for(const PlanKey& k) {
  static std::map<PlanKey, fftw_plan> cache;
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  // FFTW_ESTIMATE never touches the buffer and FFTW_UNALIGNED lets the plan
  // run on any array later, so a scratch allocation suffices for planning.
  const std::size_t span = static_cast<std::size_t>(k.n - 1) * k.stride +
                           static_cast<std::size_t>(k.howmany - 1) * k.dist + 1;
  std::vector<cplx> scratch(span);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan p =
      fftw_plan_many_dft(1, &k.n, k.howmany, buf, nullptr, k.stride, k.dist, buf,
                         nullptr, k.stride, k.dist, k.sign,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw ValidationError("fft: plan creation failed");
  cache.emplace(k, p);
  return p;
}

}  // namespace detail

// In-place batched 1D transform: for each m < howmany, transforms the length-n
// sequence at indices j*stride + m*dist.  sign: FFTW_FORWARD or FFTW_BACKWARD.
inline void many_inplace(cplx* data, int n, int howmany, int stride, int dist,
                         int sign) {
  fftw_plan p = detail::plan_for({n, howmany, stride, dist, sign});
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, buf, buf);
  if (sign == FFTW_BACKWARD) {
    const double inv = 1.0 / n;
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < howmany; ++m)
        data[static_cast<std::size_t>(j) * stride + static_cast<std::size_t>(m) * dist] *=
            inv;
  }
}

namespace detail {

inline void transform_axis(State& data, const std::vector<int>& shape, int axis,
                           int sign) {
  if (axis < 0 || axis >= static_cast<int>(shape.size()))
    throw ValidationError("fft: axis out of range");
  std::size_t total = 1;
  for (int s : shape) total *= static_cast<std::size_t>(s);
  if (total != data.size()) throw ValidationError("fft: shape does not match data size");
  const int n = shape[axis];
  long inner = 1, outer = 1;
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  for (int i = 0; i < axis; ++i) outer *= shape[i];
  for (long o = 0; o < outer; ++o)
    many_inplace(data.data() + o * static_cast<long>(n) * inner, n,
                 static_cast<int>(inner), static_cast<int>(inner), 1, sign);
}

}  // namespace detail

// Unnormalized forward transform along one axis of a row-major field.
inline void fft_axis(State& data, const std::vector<int>& shape, int axis) {
  detail::transform_axis(data, shape, axis, FFTW_FORWARD);
}

// 1/n-normalized inverse transform along one axis; exact inverse of fft_axis.
inline void ifft_axis(State& data, const std::vector<int>& shape, int axis) {
  detail::transform_axis(data, shape, axis, FFTW_BACKWARD);
}

}  // namespace vlexp::fft
