#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "vlexp/stability.hpp"
#include "vlexp/vadv.hpp"

using namespace vlexp;
using Catch::Matchers::WithinAbs;

namespace {

// Pad a column with three ghost cells per side, filled by `ghost(j)` for
// out-of-range node indices.
template <class G>
std::vector<double> pad(const std::vector<double>& f, G ghost) {
  const int n = static_cast<int>(f.size());
  std::vector<double> p(f.size() + 6);
  for (int j = -3; j < n + 3; ++j)
    p[static_cast<std::size_t>(3 + j)] =
        (j >= 0 && j < n) ? f[static_cast<std::size_t>(j)] : ghost(j);
  return p;
}

std::vector<double> pad_zero(const std::vector<double>& f) {
  return pad(f, [](int) { return 0.0; });
}

std::vector<double> pad_periodic(const std::vector<double>& f) {
  const int n = static_cast<int>(f.size());
  return pad(f, [&](int j) { return f[static_cast<std::size_t>((j % n + n) % n)]; });
}

}  // namespace

TEST_CASE("velocity grid layout", "[vadv]") {
  VGrid g(128, 8.0);
  CHECK(g.dv == 0.125);
  CHECK(g.node(0) == -8.0);
  CHECK(g.node(127) == 7.875);  // half-open: +v_max itself is not a node
  CHECK_THROWS_AS(VGrid(2, 8.0), ValidationError);
  CHECK_THROWS_AS(VGrid(16, -1.0), ValidationError);
}

TEST_CASE("centered derivative", "[vadv]") {
  VGrid g(64, 4.0);
  std::vector<double> c(64, 3.7), lin(64), quad(64), out(64);
  for (int j = 0; j < 64; ++j) {
    lin[j] = g.node(j);
    quad[j] = g.node(j) * g.node(j);
  }

  auto pc = pad_zero(c);
  cd2_dv(pc.data(), 64, g.dv, out.data());
  for (int j = 1; j < 63; ++j) CHECK(out[j] == 0.0);

  auto pl = pad_zero(lin);
  cd2_dv(pl.data(), 64, g.dv, out.data());
  for (int j = 1; j < 63; ++j) CHECK_THAT(out[j], WithinAbs(1.0, 1e-13));

  auto pq = pad_zero(quad);
  cd2_dv(pq.data(), 64, g.dv, out.data());
  for (int j = 1; j < 63; ++j) CHECK_THAT(out[j], WithinAbs(2.0 * g.node(j), 1e-12));
}

TEST_CASE("weights behave at the extremes", "[vadv]") {
  // Smooth (zero) indicators reproduce the ideal weights.
  auto W = weno_weights(0.0, 0.0, 0.0);
  for (int i = 0; i < 3; ++i) CHECK_THAT(W.w[i], WithinAbs(WenoWeights::gamma[i], 1e-15));

  // Any indicators yield a convex combination.
  auto V = weno_weights(3.0, 0.01, 1.7);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    CHECK(V.w[i] >= 0.0);
    sum += V.w[i];
  }
  CHECK_THAT(sum, WithinAbs(1.0, 1e-15));
  // A rough substencil is suppressed.
  CHECK(V.w[0] < 1e-4);
}

TEST_CASE("interface values: constants and linears are exact", "[vadv]") {
  const int n = 20;
  std::vector<double> c(n, 2.25), lin(n), flux(n + 1);
  for (int j = 0; j < n; ++j) lin[j] = j;

  auto pc = pad(c, [](int) { return 2.25; });
  for (int sign : {+1, -1}) {
    weno5_flux(pc.data(), n, sign, flux.data());
    for (int i = 0; i <= n; ++i) CHECK_THAT(flux[i], WithinAbs(2.25, 1e-14));
  }

  auto pl = pad(lin, [](int j) { return double(j); });
  for (int sign : {+1, -1}) {
    weno5_flux(pl.data(), n, sign, flux.data());
    // flux[i] sits at interface (i-1) + 1/2 = i - 1/2.
    for (int i = 0; i <= n; ++i) CHECK_THAT(flux[i], WithinAbs(i - 0.5, 1e-12));
  }

  CHECK_THROWS_AS(weno5_flux(pl.data(), n, 0, flux.data()), ValidationError);
}

TEST_CASE("interface reconstruction is fifth-order on smooth data", "[vadv]") {
  // f(v) = sin(v) on [-pi, pi), periodic ghosts; measure interface error.
  std::vector<double> errs;
  std::vector<int> sizes = {32, 64, 128};
  for (int n : sizes) {
    const double dv = 2.0 * std::numbers::pi / n;
    std::vector<double> f(n), flux(n + 1);
    for (int j = 0; j < n; ++j) f[j] = std::sin(-std::numbers::pi + j * dv);
    auto p = pad(f, [&](int j) {
      return std::sin(-std::numbers::pi + j * dv);
    });
    weno5_flux(p.data(), n, +1, flux.data());
    // The interface value targets the function whose sliding cell average
    // equals the nodal data; for sin that is sin(v) * dv / (2 sin(dv/2)).
    const double amp = dv / (2.0 * std::sin(0.5 * dv));
    double e = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double v_half = -std::numbers::pi + (i - 0.5) * dv;
      e = std::max(e, std::abs(flux[i] - amp * std::sin(v_half)));
    }
    errs.push_back(e);
  }
  const double order = std::log(errs[0] / errs[2]) / std::log(4.0);
  INFO("errors " << errs[0] << " " << errs[1] << " " << errs[2]);
  CHECK(order >= 4.5);
}

TEST_CASE("transport term basics", "[vadv]") {
  const int n = 48;
  VGrid g(n, 4.0);
  std::vector<double> out(n), ws(n + 1);

  // No field, no term.
  std::vector<double> f(n);
  for (int j = 0; j < n; ++j) f[j] = std::exp(-4.0 * g.node(j) * g.node(j));
  auto p = pad_zero(f);
  v_transport_term(p.data(), n, 0.0, g.dv, out.data(), ws.data());
  for (double o : out) CHECK(o == 0.0);

  // Constant column telescopes to zero for either field sign.
  std::vector<double> c(n, 1.3);
  auto pc = pad(c, [](int) { return 1.3; });
  for (double E : {0.7, -0.4}) {
    v_transport_term(pc.data(), n, E, g.dv, out.data(), ws.data());
    for (double o : out) CHECK_THAT(o, WithinAbs(0.0, 1e-13));
  }

  // Summing over a compactly supported column telescopes to zero.
  for (double E : {0.9, -1.1}) {
    v_transport_term(p.data(), n, E, g.dv, out.data(), ws.data());
    double sum = 0.0;
    for (double o : out) sum += o;
    CHECK(std::abs(sum) < 1e-13);
  }
}

TEST_CASE("transport term converges to E df/dv at fifth order", "[vadv]") {
  std::vector<double> errs;
  for (int n : {32, 64, 128}) {
    const double dv = 2.0 * std::numbers::pi / n;
    std::vector<double> f(n), out(n), ws(n + 1);
    auto node = [&](int j) { return -std::numbers::pi + j * dv; };
    for (int j = 0; j < n; ++j) f[j] = std::sin(node(j));
    auto p = pad(f, [&](int j) { return std::sin(node(j)); });
    v_transport_term(p.data(), n, 1.0, dv, out.data(), ws.data());
    double e = 0.0;
    for (int j = 0; j < n; ++j) e = std::max(e, std::abs(out[j] - std::cos(node(j))));
    errs.push_back(e);
  }
  const double order = std::log(errs[0] / errs[2]) / std::log(4.0);
  INFO("errors " << errs[0] << " " << errs[1] << " " << errs[2]);
  CHECK(order >= 4.5);
}

TEST_CASE("frozen weights reproduce the linearized symbol", "[vadv]") {
  // Applying the frozen-weight upwind difference to samples of e^{i theta j}
  // must multiply the mode by lw5_bracket(theta)/dv, both field signs
  // (the negative-sign symbol is the conjugate).
  const int n = 90;
  const double dv = 0.2;
  std::vector<double> re(n), im(n), ore(n), oim(n), ws(n + 1);
  for (double theta : {0.31, 1.1, 2.7}) {
    for (int j = 0; j < n; ++j) {
      re[j] = std::cos(theta * j);
      im[j] = std::sin(theta * j);
    }
    auto pr = pad(re, [&](int j) { return std::cos(theta * j); });
    auto pi = pad(im, [&](int j) { return std::sin(theta * j); });
    for (int sign : {+1, -1}) {
      // With E = sign, the output symbol is bracket/dv for the left-biased
      // branch and its conjugate for the mirrored one.
      v_transport_term(pr.data(), n, sign, dv, ore.data(), ws.data(), true);
      v_transport_term(pi.data(), n, sign, dv, oim.data(), ws.data(), true);
      const cplx symbol =
          (sign > 0 ? lw5_bracket(theta) : std::conj(lw5_bracket(theta))) / dv;
      for (int j = 0; j < n; ++j) {
        const cplx mode = std::polar(1.0, theta * j);
        const cplx got(ore[j], oim[j]);
        INFO("theta=" << theta << " sign=" << sign << " j=" << j);
        CHECK(std::abs(got - symbol * mode) < 1e-12);
      }
    }
  }
}
