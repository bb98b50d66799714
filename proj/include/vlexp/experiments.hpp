#pragma once

// Named reproduction targets and the run drivers behind the command line.
// Every target writes CSV/text artifacts plus a manifest (echo of the
// effective configuration, library version, wall time, result summary) into
// the configured output directory, so a run can be audited and re-executed
// from its own output.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "vlexp/config.hpp"
#include "vlexp/csv.hpp"
#include "vlexp/dk.hpp"
#include "vlexp/stability.hpp"
#include "vlexp/util.hpp"
#include "vlexp/version.hpp"
#include "vlexp/vp.hpp"

namespace vlexp {

struct TargetResult {
  RunOutcome outcome = RunOutcome::completed;
  std::vector<std::string> artifacts;  // file names relative to the output dir
  std::string summary;                 // key = value result lines
};

inline const std::vector<std::string>& reproduce_targets() {
  static const std::vector<std::string> t = {
      "table1",       "table3",        "table4",         "fig_rk_domains",
      "fig_exp_domains", "fig_ymax_curves", "fig_instab",  "landau",
      "bot_energy",   "bot_snapshots", "cfl_sharpness",  "dk_coarse_direct",
      "dk_coarse_pert", "dk_conservation"};
  return t;
}

inline void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw ValidationError("cannot create output directory '" + dir +
                          "': " + ec.message());
}

inline std::string path_join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline void write_manifest(const std::string& dir, const std::string& target,
                           const RunConfig& cfg, double wall_seconds,
                           const TargetResult& res) {
  std::string m;
  m += "# run manifest\n";
  m += "target = " + target + "\n";
  m += "version = " + std::string(version) + "\n";
  m += "outcome = " + std::string(to_string(res.outcome)) + "\n";
  m += "wall_seconds = " + g17(wall_seconds) + "\n";
  m += "\n[config]\n";
  for (const auto& [k, v] : config_echo(cfg)) m += k + " = " + v + "\n";
  m += "\n[artifacts]\n";
  for (const std::string& a : res.artifacts) m += a + "\n";
  m += "\n[summary]\n";
  m += res.summary;
  write_text_file(path_join(dir, "manifest.txt"), m);
}

namespace detail {

inline std::string fixed9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

// -------------------------------------------------------------------------
// Stability tables and figure data.
// -------------------------------------------------------------------------

inline TargetResult target_table1(const RunConfig& cfg) {
  TargetResult res;
  const ButcherTableau* tabs[] = {&rk22(), &rk32_best(), &rk33(), &rk44()};
  CsvWriter csv(path_join(cfg.out_dir, "table1.csv"));
  csv.header({"method", "y_max"});
  std::string txt = "imaginary-axis CFL numbers y_max of the Lawson methods\n\n";
  for (const ButcherTableau* tb : tabs) {
    const double y = ymax_lawson(*tb);
    csv.row("lawson_" + tb->name, {y});
    txt += "lawson_" + tb->name + std::string(20 - tb->name.size(), ' ') +
           fixed9(y) + "\n";
    res.summary += "y_max_lawson_" + tb->name + " = " + g17(y) + "\n";
  }
  write_text_file(path_join(cfg.out_dir, "table1.txt"), txt);
  res.artifacts = {"table1.csv", "table1.txt"};
  return res;
}

inline const std::vector<std::string>& exp_method_names() {
  static const std::vector<std::string> m = {"exp_rk22", "krogstad", "cox_matthews",
                                             "hochbruck_ostermann"};
  return m;
}

inline TargetResult target_table3(const RunConfig& cfg) {
  TargetResult res;
  const double eps_list[] = {0.0, 1e-3, 1e-2, 1e-1};
  CsvWriter csv(path_join(cfg.out_dir, "table3.csv"));
  csv.header({"method", "eps", "y_max", "argmin_a"});
  std::string txt =
      "relaxed imaginary-axis CFL numbers y_max(eps) of the exponential "
      "methods\n\nmethod                    eps=0    1e-3    1e-2    1e-1\n";
  for (const std::string& m : exp_method_names()) {
    char row[128];
    std::snprintf(row, sizeof row, "%-22s", m.c_str());
    txt += row;
    for (double eps : eps_list) {
      const YmaxExpResult r = ymax_exp(m, eps);
      csv.row(m, {eps, r.y_max, r.argmin_a});
      std::snprintf(row, sizeof row, "  %6.3f", r.y_max);
      txt += row;
      res.summary += "y_max_" + m + "_eps" + g17(eps) + " = " + g17(r.y_max) + "\n";
    }
    txt += "\n";
  }
  write_text_file(path_join(cfg.out_dir, "table3.txt"), txt);
  res.artifacts = {"table3.csv", "table3.txt"};
  return res;
}

inline TargetResult target_table4(const RunConfig& cfg) {
  TargetResult res;
  const ButcherTableau* tabs[] = {&rk32_best(), &rk33(), &rk44()};
  CsvWriter csv(path_join(cfg.out_dir, "table4.csv"));
  csv.header({"method", "sigma", "argmin_theta"});
  CsvWriter curves(path_join(cfg.out_dir, "table4_curves.csv"));
  curves.header({"method", "theta", "sigma_k"});
  std::string txt =
      "stretching factors sigma of the Lawson methods on the linearized "
      "5-point upwind symbol\n\n";
  for (const ButcherTableau* tb : tabs) {
    const SigmaScan s = sigma_lw5(*tb);
    csv.row("lawson_" + tb->name, {s.sigma, s.argmin_theta});
    for (std::size_t k = 0; k < s.theta.size(); ++k)
      curves.row("lawson_" + tb->name, {s.theta[k], s.sigma_k[k]});
    txt += "lawson_" + tb->name + std::string(20 - tb->name.size(), ' ') +
           fixed9(s.sigma) + "\n";
    res.summary += "sigma_lawson_" + tb->name + " = " + g17(s.sigma) + "\n";
  }
  write_text_file(path_join(cfg.out_dir, "table4.txt"), txt);
  res.artifacts = {"table4.csv", "table4_curves.csv", "table4.txt"};
  return res;
}

inline TargetResult target_fig_rk_domains(const RunConfig& cfg) {
  TargetResult res;
  const ButcherTableau* tabs[] = {&rk22(), &rk32_best(), &rk33(), &rk44()};
  const int n_angles = 720;
  std::vector<double> angles(n_angles);
  for (int k = 0; k < n_angles; ++k)
    angles[k] = 2.0 * M_PI * (k + 1) / n_angles;
  for (const ButcherTableau* tb : tabs) {
    const std::vector<cplx> pts = boundary_trace(*tb, angles);
    const std::string name = "rk_domain_" + tb->name + ".csv";
    CsvWriter csv(path_join(cfg.out_dir, name));
    csv.header({"angle", "re", "im"});
    for (int k = 0; k < n_angles; ++k)
      csv.row({angles[k], pts[k].real(), pts[k].imag()});
    res.artifacts.push_back(name);
    double rmax = 0.0;
    for (const cplx& p : pts) rmax = std::max(rmax, std::abs(p));
    res.summary += "max_boundary_radius_" + tb->name + " = " + g17(rmax) + "\n";
  }
  return res;
}

inline TargetResult target_fig_exp_domains(const RunConfig& cfg) {
  TargetResult res;
  for (const std::string& m : exp_method_names()) {
    const YmaxExpResult r = ymax_exp(m, cfg.eps);
    const std::string name = "exp_domain_" + m + ".csv";
    CsvWriter csv(path_join(cfg.out_dir, name));
    csv.line("# eps = " + g17(cfg.eps));
    csv.header({"a_dt", "y_plus", "y_minus", "y_max"});
    for (std::size_t i = 0; i < r.scan.a_grid.size(); ++i)
      csv.row({r.scan.a_grid[i], r.scan.y_plus[i], r.scan.y_minus[i],
               r.scan.y_max[i]});
    res.artifacts.push_back(name);
    res.summary += "y_max_" + m + " = " + g17(r.y_max) + " (argmin_a = " +
                   g17(r.argmin_a) + ")\n";
  }
  return res;
}

inline TargetResult target_fig_ymax_curves(const RunConfig& cfg) {
  TargetResult res;
  const double eps_list[] = {1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3,
                             1e-2, 2e-2, 5e-2, 1e-1, 2e-1};
  // Coarser a-grid than the table scan: the curves trade a little argmin
  // resolution for an 11-point eps sweep per method.
  const std::vector<double> a_grid = default_a_grid(40.0, 0.05);
  CsvWriter csv(path_join(cfg.out_dir, "ymax_curves.csv"));
  csv.header({"method", "eps", "y_max"});
  for (const std::string& m : exp_method_names()) {
    for (double eps : eps_list) {
      const YmaxExpResult r = ymax_exp(m, eps, a_grid);
      csv.row(m, {eps, r.y_max});
    }
    res.summary += "curve_written_" + m + " = 11 eps points\n";
  }
  res.artifacts = {"ymax_curves.csv"};
  return res;
}

inline TargetResult target_fig_instab(const RunConfig& cfg) {
  TargetResult res;
  const double eps_list[] = {1e-3, 1e-2, 1e-1};
  for (const std::string& m : {std::string("hochbruck_ostermann"),
                               std::string("cox_matthews")}) {
    const std::string name = "instab_" + m + ".csv";
    CsvWriter csv(path_join(cfg.out_dir, name));
    csv.header({"eps", "n", "t", "ratio", "bound"});
    for (double eps : eps_list) {
      const LinearTransportResult r = run_linear_transport(
          cfg.d, cfg.b, cfg.vmax, m, eps, cfg.nx, cfg.nv, cfg.steps);
      for (int n = 0; n < int(r.ratio.size()); ++n)
        csv.row({eps, double(n), n * r.dt, r.ratio[n],
                 std::pow(1.0 + eps, 2.0 * n)});
      res.summary += "final_ratio_" + m + "_eps" + g17(eps) + " = " +
                     g17(r.ratio.back()) + " (bound " +
                     g17(std::pow(1.0 + eps, 2.0 * cfg.steps)) + ")\n";
    }
    res.artifacts.push_back(name);
  }
  return res;
}

}  // namespace detail

// -------------------------------------------------------------------------
// 1D1V run driver (shared by the vp subcommand and the kinetic targets).
// -------------------------------------------------------------------------

inline void write_vp_diag(const std::string& path,
                          const std::vector<VPDiagRow>& rows) {
  CsvWriter csv(path);
  csv.header({"t", "dt", "electric_energy", "total_energy", "mass", "l2norm"});
  for (const VPDiagRow& r : rows)
    csv.row({r.t, r.dt, r.electric_energy, r.total_energy, r.mass, r.l2norm});
}

namespace detail {

inline void write_vp_slice(const RunConfig& cfg, const VPState& s, int index,
                           TargetResult& res) {
  const int nx = s.grid.nx, nv = s.grid.v.n;
  State real = s.fhat;
  fft::ifft_axis(real, {nx, nv}, 0);
  std::vector<double> vals(real.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = real[i].real();
  const std::string bin = "fslice_" + std::to_string(index) + ".bin";
  const std::string hdr = "fslice_" + std::to_string(index) + ".txt";
  write_binary_doubles(path_join(cfg.out_dir, bin), vals);
  std::string h;
  h += "# distribution slice f(x, v)\n";
  h += "t = " + g17(s.t) + "\n";
  h += "nx = " + std::to_string(nx) + "\n";
  h += "nv = " + std::to_string(nv) + "\n";
  h += "Lx = " + g17(s.grid.Lx) + "\n";
  h += "vmax = " + g17(s.grid.v.v_max) + "\n";
  h += "layout = row-major [x][v], float64, native endianness\n";
  h += "payload = " + bin + "\n";
  write_text_file(path_join(cfg.out_dir, hdr), h);
  res.artifacts.push_back(bin);
  res.artifacts.push_back(hdr);
}

}  // namespace detail

// Run one of the 1D1V cases (landau | bot | linear per cfg.experiment) and
// write diag.csv (or ratio.csv), optional f-slices, and summary lines.
inline TargetResult run_vp_case(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  TargetResult res;

  if (cfg.experiment == "linear") {
    const LinearTransportResult r = run_linear_transport(
        cfg.d, cfg.b, cfg.vmax, cfg.method, cfg.eps, cfg.nx, cfg.nv, cfg.steps);
    CsvWriter csv(path_join(cfg.out_dir, "ratio.csv"));
    csv.header({"n", "t", "ratio", "bound"});
    for (int n = 0; n < int(r.ratio.size()); ++n)
      csv.row({double(n), n * r.dt, r.ratio[n], std::pow(1.0 + cfg.eps, 2.0 * n)});
    res.artifacts = {"ratio.csv"};
    res.summary += "dt = " + g17(r.dt) + "\n";
    res.summary += "y_max = " + g17(r.y_max) + "\n";
    res.summary += "final_ratio = " + g17(r.ratio.back()) + "\n";
    res.summary +=
        "final_bound = " + g17(std::pow(1.0 + cfg.eps, 2.0 * cfg.steps)) + "\n";
    return res;
  }

  VPState state;
  if (cfg.experiment == "landau") {
    state = vp_initial_landau(cfg.nx, cfg.nv, cfg.vmax);
  } else if (cfg.experiment == "bot") {
    state = vp_initial_bump_on_tail(cfg.nx, cfg.nv, cfg.vmax);
  } else {
    throw ValidationError("vp run: case must be landau, bot, or linear (got '" +
                          cfg.experiment + "')");
  }

  VPRunConfig rc;
  rc.method = cfg.method;
  rc.scheme = vscheme_from_name(cfg.scheme);
  if (cfg.dt > 0.0) {
    rc.dt_fixed = cfg.dt;
  } else if (cfg.cfl_c > 0.0) {
    rc.cfl.C = cfg.cfl_c;
    rc.cfl.scheme = rc.scheme;
    if (cfg.dt_cap > 0.0) rc.cfl.dt_cap = cfg.dt_cap;
  } else {
    throw ValidationError("vp run: need a fixed dt or a CFL constant");
  }

  // Segment the run at the requested snapshot times.
  std::vector<double> marks;
  for (double s : cfg.snapshot_times)
    if (s > 1e-12 && s < cfg.tfinal - 1e-12) marks.push_back(s);
  marks.push_back(cfg.tfinal);

  int slice_index = 0;
  const bool snap0 = !cfg.snapshot_times.empty() && cfg.snapshot_times.front() <= 1e-12;
  const bool snap_end =
      !cfg.snapshot_times.empty() && cfg.snapshot_times.back() >= cfg.tfinal - 1e-12;
  if (snap0) detail::write_vp_slice(cfg, state, slice_index++, res);

  std::vector<VPDiagRow> rows;
  for (std::size_t seg = 0; seg < marks.size(); ++seg) {
    VPRunConfig seg_rc = rc;
    seg_rc.tfinal = marks[seg] - state.t;
    VPRunResult r = vp_run(std::move(state), seg_rc);
    if (!rows.empty()) rows.pop_back();  // segment boundary row is duplicated
    rows.insert(rows.end(), r.rows.begin(), r.rows.end());
    state = std::move(r.final_state);
    if (r.outcome != RunOutcome::completed) {
      res.outcome = r.outcome;
      res.summary += "aborted_at_t = " + g17(state.t) + "\n";
      break;
    }
    const bool last = seg + 1 == marks.size();
    if (!last || snap_end) detail::write_vp_slice(cfg, state, slice_index++, res);
  }

  write_vp_diag(path_join(cfg.out_dir, "diag.csv"), rows);
  res.artifacts.insert(res.artifacts.begin(), "diag.csv");

  std::vector<double> ts, elec;
  for (const VPDiagRow& r : rows) {
    ts.push_back(r.t);
    elec.push_back(r.electric_energy);
  }
  if (cfg.experiment == "landau" && res.outcome == RunOutcome::completed) {
    try {
      const double rate = peak_fit_rate(ts, elec, 0.0, std::min(cfg.tfinal, 40.0));
      res.summary += "fitted_damping_rate = " + g17(rate) + "\n";
      write_text_file(path_join(cfg.out_dir, "fit.txt"),
                      "fitted_damping_rate = " + g17(rate) +
                          "\nfit_window = [0, " +
                          g17(std::min(cfg.tfinal, 40.0)) +
                          "]\nfit_series = electric_energy peaks\n");
      res.artifacts.push_back("fit.txt");
    } catch (const ValidationError&) {
      res.summary += "fitted_damping_rate = n/a (fewer than two peaks)\n";
    }
  }
  if (!rows.empty()) {
    const double h0 = rows.front().total_energy, m0 = rows.front().mass;
    double hdrift = 0.0, mdrift = 0.0;
    for (const VPDiagRow& r : rows) {
      hdrift = std::max(hdrift, std::abs(r.total_energy - h0) / std::abs(h0));
      mdrift = std::max(mdrift, std::abs(r.mass - m0) / std::abs(m0));
    }
    res.summary += "max_energy_drift_rel = " + g17(hdrift) + "\n";
    res.summary += "max_mass_drift_rel = " + g17(mdrift) + "\n";
    res.summary += "max_electric_energy = " +
                   g17(*std::max_element(elec.begin(), elec.end())) + "\n";
  }
  return res;
}

// -------------------------------------------------------------------------
// 4D run driver (shared by the dk subcommand and the dk_* targets).
// -------------------------------------------------------------------------

inline TargetResult run_dk_case(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  TargetResult res;

  DKGrid grid(cfg.nr, cfg.ntheta, cfg.nz, cfg.nv, cfg.r_min, cfg.r_max, cfg.zlen,
              cfg.vmax);
  DKSolver solver(grid, RadialProfiles::medium(),
                  dk_formulation_from_name(cfg.formulation));
  solver.set_bracket_audit(true);
  State f0 = solver.initial_state(cfg.ic_eps, cfg.ic_m, cfg.ic_n);

  DKRunConfig rc;
  rc.method = cfg.method;
  rc.tfinal = cfg.tfinal;
  rc.adaptive = cfg.adaptive;
  if (!cfg.adaptive) {
    if (!(cfg.dt > 0.0))
      throw ValidationError("dk run: the fixed controller needs dt > 0");
    rc.dt_fixed = cfg.dt;
  }
  rc.tol = cfg.tol;
  rc.dt0 = cfg.dt0;
  rc.dt_max = cfg.dt_max;
  rc.safety = cfg.safety;
  rc.reject_cap = cfg.reject_cap;
  rc.classical_factor = cfg.classical_richardson;
  rc.snapshot_times = cfg.snapshot_times;

  DKRunResult r = dk_run(solver, std::move(f0), rc);
  res.outcome = r.outcome;

  {
    CsvWriter csv(path_join(cfg.out_dir, "diag.csv"));
    csv.header({"t", "dt", "accepted", "elec_energy", "mass_rel_err",
                "energy_rel_err"});
    for (const DKDiagRow& row : r.rows)
      csv.row({row.t, row.dt, double(row.accepted), row.elec_energy,
               row.mass_rel_err, row.energy_rel_err});
    if (!r.trials.empty()) {
      csv.line("# controller_trace");
      csv.header({"t", "dt_tried", "e", "accepted"});
      for (const DKTrial& tr : r.trials)
        csv.row({tr.t, tr.dt_tried, tr.e, double(tr.accepted)});
    }
  }
  res.artifacts.push_back("diag.csv");

  for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
    const DKSolver::Snapshot& s = r.snapshots[i];
    const std::string tag = "snap_" + std::to_string(i);
    write_binary_doubles(path_join(cfg.out_dir, tag + "_f.bin"), s.f_slice);
    write_binary_doubles(path_join(cfg.out_dir, tag + "_density.bin"), s.density);
    std::string h;
    h += "# f(r, theta) at z = 0, v = v0, and density integral f dv at z = 0\n";
    h += "t = " + g17(s.t) + "\n";
    h += "v0 = " + g17(s.v0) + "\n";
    h += "nr = " + std::to_string(s.nr) + "\n";
    h += "ntheta = " + std::to_string(s.ntheta) + "\n";
    h += "r_min = " + g17(cfg.r_min) + "\n";
    h += "r_max = " + g17(cfg.r_max) + "\n";
    h += "layout = row-major [r][theta], float64, native endianness\n";
    h += "f_slice = " + tag + "_f.bin\n";
    h += "density = " + tag + "_density.bin\n";
    write_text_file(path_join(cfg.out_dir, tag + ".txt"), h);
    res.artifacts.push_back(tag + "_f.bin");
    res.artifacts.push_back(tag + "_density.bin");
    res.artifacts.push_back(tag + ".txt");
  }

  res.summary += "final_t = " + g17(r.t) + "\n";
  res.summary += "accepted_steps = " + std::to_string(r.accepted) + "\n";
  res.summary += "rejected_steps = " + std::to_string(r.rejected) + "\n";
  double max_mass = 0.0, max_energy = 0.0;
  for (const DKDiagRow& row : r.rows) {
    max_mass = std::max(max_mass, row.mass_rel_err);
    max_energy = std::max(max_energy, row.energy_rel_err);
  }
  res.summary += "max_mass_rel_err = " + g17(max_mass) + "\n";
  res.summary += "max_energy_rel_err = " + g17(max_energy) + "\n";
  res.summary +=
      "final_elec_energy = " + g17(r.rows.back().elec_energy) + "\n";
  const auto& ratios = solver.worst_bracket_ratios();
  res.summary += "bracket_sum_ratio_J = " + g17(ratios[0]) + "\n";
  res.summary += "bracket_sum_ratio_phiJ = " + g17(ratios[1]) + "\n";
  res.summary += "bracket_sum_ratio_fJ = " + g17(ratios[2]) + "\n";
  res.summary +=
      "bracket_audited_evals = " + std::to_string(solver.audited_evaluations()) + "\n";
  if (r.outcome == RunOutcome::completed) {
    try {
      std::vector<double> ts, elec;
      for (const DKDiagRow& row : r.rows)
        if (row.accepted) {
          ts.push_back(row.t);
          elec.push_back(row.elec_energy);
        }
      const double rate =
          fit_log_rate(ts, elec, 0.05 * cfg.tfinal, 0.95 * cfg.tfinal);
      res.summary += "fitted_growth_rate = " + g17(rate) + "\n";
    } catch (const ValidationError&) {
      res.summary += "fitted_growth_rate = n/a\n";
    }
  }
  return res;
}

namespace detail {

// -------------------------------------------------------------------------
// Kinetic reproduction targets on top of the drivers.
// -------------------------------------------------------------------------

inline TargetResult target_cfl_sharpness(const RunConfig& cfg) {
  TargetResult res;
  struct Case {
    const char* scheme;
    double dt, tfinal;
  };
  const Case cases[] = {{"weno5", 0.09, 60.0},
                        {"weno5", 0.13, 40.0},
                        {"cd2", 0.14, 60.0},
                        {"cd2", 0.2, 40.0}};
  for (const Case& c : cases) {
    char dt_label[32];
    std::snprintf(dt_label, sizeof dt_label, "%g", c.dt);
    VPState state = vp_initial_bump_on_tail(cfg.nx, cfg.nv, cfg.vmax);
    VPRunConfig rc;
    rc.method = cfg.method;
    rc.scheme = vscheme_from_name(c.scheme);
    rc.dt_fixed = c.dt;
    rc.tfinal = c.tfinal;
    VPRunResult r = vp_run(std::move(state), rc);
    const std::string name =
        "diag_" + std::string(c.scheme) + "_dt" + dt_label + ".csv";
    write_vp_diag(path_join(cfg.out_dir, name), r.rows);
    res.artifacts.push_back(name);
    double max_elec = 0.0;
    for (const VPDiagRow& row : r.rows)
      max_elec = std::max(max_elec, row.electric_energy);
    res.summary += std::string(c.scheme) + "_dt" + dt_label + " = " +
                   to_string(r.outcome) + " (last t " + g17(r.rows.back().t) +
                   ", max electric energy " + g17(max_elec) + ")\n";
  }
  // The two blow-ups are the point of the experiment, not a failure of it.
  return res;
}

inline TargetResult target_dk_conservation(const RunConfig& cfg) {
  TargetResult res = run_dk_case(cfg);
  std::string txt = "# conservation summary of the coarse 4D run\n";
  txt += res.summary;
  write_text_file(path_join(cfg.out_dir, "conservation.txt"), txt);
  res.artifacts.push_back("conservation.txt");
  return res;
}

}  // namespace detail

// Target-specific parameter defaults; a user config file is applied on top.
inline RunConfig target_defaults(const std::string& target) {
  if (target == "landau") return experiment_defaults("landau");
  if (target == "bot_energy") return experiment_defaults("bot");
  if (target == "bot_snapshots") {
    RunConfig c = experiment_defaults("bot");
    c.snapshot_times = {0.0, 20.0, 30.0, 40.0};
    return c;
  }
  if (target == "cfl_sharpness") {
    RunConfig c = experiment_defaults("bot");
    c.nx = 81;
    c.nv = 512;
    return c;
  }
  if (target == "fig_instab") return experiment_defaults("linear");
  if (target == "dk_coarse_direct" || target == "dk_coarse_pert") {
    RunConfig c = experiment_defaults("dk");
    c.formulation = (target == "dk_coarse_direct") ? "direct" : "pert";
    return c;
  }
  if (target == "dk_conservation") {
    RunConfig c = experiment_defaults("dk");
    c.nr = 16;
    c.ntheta = 16;
    c.nz = 8;
    c.nv = 32;
    c.tfinal = 400.0;
    return c;
  }
  const auto& all = reproduce_targets();
  if (std::find(all.begin(), all.end(), target) == all.end()) {
    std::string msg = "unknown reproduce target '" + target + "' (expected one of:";
    for (const std::string& t : all) msg += " " + t;
    throw ValidationError(msg + ")");
  }
  return experiment_defaults("");  // stability targets need no run parameters
}

// Run a named target and write its artifacts plus manifest into cfg.out_dir.
inline TargetResult reproduce(const std::string& target, const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  TargetResult res;
  if (target == "table1")
    res = detail::target_table1(cfg);
  else if (target == "table3")
    res = detail::target_table3(cfg);
  else if (target == "table4")
    res = detail::target_table4(cfg);
  else if (target == "fig_rk_domains")
    res = detail::target_fig_rk_domains(cfg);
  else if (target == "fig_exp_domains")
    res = detail::target_fig_exp_domains(cfg);
  else if (target == "fig_ymax_curves")
    res = detail::target_fig_ymax_curves(cfg);
  else if (target == "fig_instab")
    res = detail::target_fig_instab(cfg);
  else if (target == "landau" || target == "bot_energy" || target == "bot_snapshots")
    res = run_vp_case(cfg);
  else if (target == "cfl_sharpness")
    res = detail::target_cfl_sharpness(cfg);
  else if (target == "dk_coarse_direct" || target == "dk_coarse_pert")
    res = run_dk_case(cfg);
  else if (target == "dk_conservation")
    res = detail::target_dk_conservation(cfg);
  else
    target_defaults(target);  // throws the unknown-target error
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(cfg.out_dir, target, cfg, wall, res);
  res.artifacts.push_back("manifest.txt");
  return res;
}

}  // namespace vlexp
