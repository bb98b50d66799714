#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "vlexp/vp.hpp"

using namespace vlexp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

State to_real_space(const VPGrid& g, State fhat) {
  fft::ifft_axis(fhat, {g.nx, g.v.n}, 0);
  return fhat;
}

double linf_real(const State& a) {
  double m = 0;
  for (const cplx& c : a) m = std::max(m, std::abs(c.real()));
  return m;
}

}  // namespace

TEST_CASE("vp grid layout and quadrature weights", "[vp]") {
  VPGrid g(81, 4.0 * M_PI, 128, 8.0);
  CHECK(g.dx() == Catch::Approx(4.0 * M_PI / 81).epsilon(1e-15));
  CHECK(g.v.dv == 0.125);
  CHECK(g.vw(0) == 0.0625);
  CHECK(g.vw(1) == 0.125);
  CHECK(g.vw(127) == 0.125);
  CHECK(g.idx(2, 3) == 2 * 128 + 3);
  CHECK_THROWS_AS(VPGrid(2, 1.0, 8, 1.0), ValidationError);
}

TEST_CASE("landau initial state: density, field, diagnostics", "[vp]") {
  VPState s = vp_initial_landau(81, 128);
  const VPGrid& g = s.grid;
  REQUIRE(g.Lx == Catch::Approx(4.0 * M_PI).epsilon(1e-15));

  // rho(x) = (1 + 0.001 cos(x/2)) * [trapezoid quadrature of the Maxwellian].
  double deficit = 0.0;
  std::vector<double> E = vp_electric_field(g, s.fhat, &deficit);
  CHECK(std::abs(deficit) < 1e-13);  // quadrature of the Maxwellian is 1 to round-off

  // E = 0.002 sin(x/2): max over nodes within grid-sampling distance of 2e-3.
  double e_inf = 0.0;
  for (double e : E) e_inf = std::max(e_inf, std::abs(e));
  CHECK_THAT(e_inf, WithinAbs(2e-3, 1e-5));
  // Node-exact comparison against the closed form.
  for (int i = 0; i < g.nx; i += 7)
    CHECK_THAT(E[i], WithinAbs(0.002 * std::sin(0.5 * g.x(i)), 1e-15));

  VPDiagnostics d = vp_diagnostics(g, s.fhat);
  CHECK_THAT(d.electric_energy, WithinRel(0.002 * std::sqrt(g.Lx / 2.0), 1e-10));
  CHECK_THAT(d.mass, WithinRel(4.0 * M_PI, 1e-12));
  // Unit-temperature Maxwellian: total energy ~ L/2 plus the tiny field part.
  CHECK_THAT(d.total_energy, WithinRel(0.5 * 4.0 * M_PI, 1e-5));
}

TEST_CASE("spatially homogeneous neutral state has zero rhs", "[vp]") {
  VPGrid g(32, 4.0 * M_PI, 64, 8.0);
  // f(v) scaled so the trapezoid integral is exactly 1 => rho == 1 => E == 0.
  std::vector<double> prof(g.v.n);
  double q = 0.0;
  for (int j = 0; j < g.v.n; ++j) {
    prof[j] = std::exp(-0.5 * g.v.node(j) * g.v.node(j));
    q += g.vw(j) * prof[j];
  }
  VPState s = vp_initialize(g, [&](double, double v) {
    const int j = static_cast<int>(std::lround((v + g.v.v_max) / g.v.dv));
    return prof[j] / q;
  });

  for (VScheme sch : {VScheme::cd2, VScheme::weno5}) {
    VPRhs rhs(g, sch);
    State out;
    rhs(0.0, s.fhat, out);
    CHECK(linf_norm(out) < 1e-13);
    for (double e : rhs.last_electric_field()) CHECK(std::abs(e) < 1e-14);
  }
}

TEST_CASE("plane wave with zero nonlinearity advects by exact shift", "[vp]") {
  VPGrid g(27, 2.0 * M_PI, 16, 2.0);
  const double k1 = 1.0;  // first harmonic of the box
  VPState s = vp_initialize(
      g, [&](double x, double v) { return std::cos(k1 * x) * std::exp(-v * v); });

  DiagonalPropagator A = vp_linear_propagator(g);
  Rhs zero = [](double, const State& u, State& du) { du.assign(u.size(), 0.0); };
  auto integ = make_integrator("lawson_rk44");
  const double dt = 0.37;
  State out;
  integ->step(A, zero, 0.0, s.fhat, dt, out);

  State real = to_real_space(g, out);
  for (int i = 0; i < g.nx; i += 5)
    for (int j = 0; j < g.v.n; ++j) {
      const double expect =
          std::cos(k1 * (g.x(i) - g.v.node(j) * dt)) * std::exp(-std::pow(g.v.node(j), 2));
      CHECK_THAT(real[g.idx(i, j)].real(), WithinAbs(expect, 1e-13));
    }
}

TEST_CASE("manufactured field: rhs converges to -E df/dv at scheme order", "[vp]") {
  // f = (1 + 0.5 cos x) g(v) with g = e^{-v^2}: the zero-mean-gauge field is
  // E = 0.5 sqrt(pi) sin(x) (up to the quadrature constant), and the exact
  // advection term is -E(x) g'(v) (1 + 0.5 cos x).
  auto err_for = [](int nv, VScheme sch) {
    VPGrid g(31, 2.0 * M_PI, nv, 6.0);
    VPState s = vp_initialize(g, [](double x, double v) {
      return (1.0 + 0.5 * std::cos(x)) * std::exp(-v * v);
    });
    // Quadrature value of integral e^{-v^2} dv on the grid (very nearly sqrt(pi)).
    double q = 0.0;
    for (int j = 0; j < g.v.n; ++j) q += g.vw(j) * std::exp(-std::pow(g.v.node(j), 2));

    VPRhs rhs(g, sch);
    State out;
    rhs(0.0, s.fhat, out);
    fft::ifft_axis(out, {g.nx, g.v.n}, 0);

    double emax = 0.0;
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.v.n; ++j) {
        const double x = g.x(i), v = g.v.node(j);
        const double E = 0.5 * q * std::sin(x);
        const double exact = -E * (1.0 + 0.5 * std::cos(x)) * (-2.0 * v) * std::exp(-v * v);
        emax = std::max(emax, std::abs(out[g.idx(i, j)].real() - exact));
      }
    return emax;
  };

  const double c1 = err_for(64, VScheme::cd2), c2 = err_for(128, VScheme::cd2);
  CHECK(std::log2(c1 / c2) > 1.8);
  const double w1 = err_for(64, VScheme::weno5), w2 = err_for(128, VScheme::weno5);
  CHECK(std::log2(w1 / w2) > 4.3);
}

TEST_CASE("cfl step rule", "[vp]") {
  CflRule plain{1.0, VScheme::cd2, std::numeric_limits<double>::infinity()};

  SECTION("landau numbers: dt = 62.5 C") {
    for (double C : {2.0, std::sqrt(3.0), 2.0 * std::sqrt(2.0), 1.73}) {
      CflRule r{C, VScheme::weno5, std::numeric_limits<double>::infinity()};
      CHECK_THAT(cfl_dt(r, 2e-3, 0.125), WithinRel(62.5 * C, 1e-12));
    }
  }
  SECTION("bump-on-tail worst case") {
    CflRule r{1.344, VScheme::weno5, std::numeric_limits<double>::infinity()};
    CHECK_THAT(cfl_dt(r, 0.6, 16.0 / 256), WithinAbs(0.14, 1e-3));
  }
  SECTION("zero field hits the cap") {
    CflRule r{1.0, VScheme::cd2, 0.1};
    CHECK(cfl_dt(r, 0.0, 0.125) == 0.1);
    CHECK(std::isinf(cfl_dt(plain, 0.0, 0.125)));
  }
  SECTION("validation") {
    CHECK_THROWS_AS(cfl_dt(CflRule{0.0, VScheme::cd2, 1.0}, 1.0, 0.1), ValidationError);
    CHECK_THROWS_AS(cfl_dt(plain, -1.0, 0.1), ValidationError);
  }
}

TEST_CASE("short landau run conserves mass and hermitian symmetry", "[vp]") {
  VPState s = vp_initial_landau(27, 64);
  VPRunConfig cfg;
  cfg.method = "lawson_rk44";
  cfg.scheme = VScheme::weno5;
  cfg.dt_fixed = 0.125;
  cfg.tfinal = 2.5;
  VPRunResult r = vp_run(s, cfg);

  REQUIRE(r.outcome == RunOutcome::completed);
  REQUIRE(r.rows.size() == 21);
  const double m0 = r.rows.front().mass;
  for (const auto& row : r.rows) CHECK(std::abs(row.mass - m0) / std::abs(m0) < 1e-13);
  CHECK(vp_hermitian_defect(r.final_state.fhat, 27, 64) < 1e-12);
  CHECK_THAT(r.final_state.t, WithinAbs(2.5, 1e-12));
}

TEST_CASE("run with cfl-recomputed step sizes records the rule's dt", "[vp]") {
  VPState s = vp_initial_landau(27, 64);
  VPRunConfig cfg;
  cfg.method = "lawson_rk33";
  cfg.scheme = VScheme::cd2;
  cfg.cfl = CflRule{std::sqrt(3.0), VScheme::cd2, 50.0};
  cfg.tfinal = 100.0;
  VPRunResult r = vp_run(s, cfg);

  REQUIRE(r.outcome == RunOutcome::completed);
  // |E| ~ 2e-3 throughout, so dt ~ sqrt(3) * 0.25 / 2e-3 > the 50 cap: cap binds.
  CHECK(r.rows.front().dt == 50.0);
  REQUIRE(r.rows.size() == 3);
}

TEST_CASE("blow-up detector stops an unstable run", "[vp]") {
  // Far beyond the CFL limit for lawson_rk22 (y_max = 0) + CD2.
  VPState s = vp_initial_bump_on_tail(33, 64);
  VPRunConfig cfg;
  cfg.method = "lawson_rk22";
  cfg.scheme = VScheme::cd2;
  cfg.dt_fixed = 2.0;
  cfg.tfinal = 400.0;
  VPRunResult r = vp_run(s, cfg);
  CHECK(r.outcome == RunOutcome::blow_up);
  CHECK(r.final_state.t < 400.0);
}

TEST_CASE("linear transport: pure x-advection keeps the norm exactly", "[vp][transport]") {
  LinearTransportResult r =
      run_linear_transport(1.0, 0.0, 3.0, "hochbruck_ostermann", 1e-2, 32, 32, 25);
  for (double q : r.ratio) CHECK_THAT(q, WithinAbs(1.0, 1e-12));
}

TEST_CASE("linear transport: relaxed bound holds for small eps", "[vp][transport]") {
  const double eps = 1e-2;
  LinearTransportResult r =
      run_linear_transport(1.0, 1.0, 3.0, "hochbruck_ostermann", eps, 48, 48, 60);
  CHECK(r.y_max > 0.5);  // 0.617 from the relaxed-domain scan
  for (std::size_t n = 0; n < r.ratio.size(); ++n)
    CHECK(r.ratio[n] <= std::pow((1.0 + eps) * (1.0 + eps), double(n)) * (1.0 + 1e-9));
}

TEST_CASE("linear transport rejects methods with empty stability interval", "[vp][transport]") {
  CHECK_THROWS_AS(run_linear_transport(1.0, 1.0, 3.0, "krogstad", 0.0, 32, 32, 10),
                  ValidationError);
  CHECK_THROWS_AS(run_linear_transport(1.0, 1.0, 3.0, "lawson_rk22", 1e-2, 32, 32, 10),
                  ValidationError);
}

TEST_CASE("lawson methods accept the transport experiment via table-1 numbers", "[vp][transport]") {
  LinearTransportResult r =
      run_linear_transport(1.0, 1.0, 3.0, "lawson_rk44", 0.0, 32, 32, 40);
  CHECK_THAT(r.y_max, WithinAbs(2.0 * std::sqrt(2.0), 1e-6));
  // CD2 eigenvalues on the imaginary axis within the RK(4,4) domain: no growth.
  for (double q : r.ratio) CHECK(q <= 1.0 + 1e-9);
}
