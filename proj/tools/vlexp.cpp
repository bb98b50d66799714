// Command line front end: stability tables and domain traces, 1D1V and 4D
// kinetic runs, and named reproduction targets.
//
// Exit codes: 0 success, 2 validation error (bad flags, bad config, unknown
// names), 3 numerical abort (blow-up or rejection cap).

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vlexp/experiments.hpp"
#include "vlexp/version.hpp"

namespace {

using namespace vlexp;

const char* kUsage = R"(vlexp %s — kinetic-equation solver with Lawson and exponential integrators

usage:
  vlexp stab table1|table3|table4 [--out DIR] [--config FILE]
  vlexp stab domain --method NAME [--out DIR]          (NAME: rk22|rk32_best|rk33|rk44)
  vlexp stab ymax --method NAME [--eps E]              (prints the CFL number)
  vlexp tableau NAME                                   (dumps the Butcher tableau)
  vlexp vp run --case landau|bot|linear [--method M] [--vscheme cd2|weno5]
               [--nx N] [--nv N] [--vmax V] [--dt X | --cfl C] [--dt-cap X]
               [--tfinal T] [--steps N] [--eps E] [--snapshots T1,T2,...]
               [--config FILE] [--out DIR]
  vlexp dk run --formulation direct|pert [--method M] [--grid NR,NT,NZ,NV]
               --controller fixed:DT|richardson:TOL[,DTMAX]
               [--tfinal T] [--snapshots T1,T2,...] [--config FILE] [--out DIR]
  vlexp reproduce TARGET [--config FILE] [--out DIR]
  vlexp --help | --version

global: --threads N      (default from VLEXP_THREADS; recorded in the manifest,
                          the numerical kernels are deterministic and serial)

reproduce targets: table1 table3 table4 fig_rk_domains fig_exp_domains
  fig_ymax_curves fig_instab landau bot_energy bot_snapshots cfl_sharpness
  dk_coarse_direct dk_coarse_pert dk_conservation
)";

struct Args {
  std::vector<std::string> pos;
  std::map<std::string, std::string> flags;

  std::optional<std::string> take(const std::string& name) {
    auto it = flags.find(name);
    if (it == flags.end()) return std::nullopt;
    std::string v = it->second;
    flags.erase(it);
    return v;
  }

  void reject_leftovers() const {
    if (flags.empty()) return;
    std::string msg = "unknown flag(s) for this subcommand:";
    for (const auto& [k, v] : flags) msg += " --" + k;
    throw ValidationError(msg);
  }
};

double to_double(const std::string& name, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ValidationError("flag --" + name + " expects a number, got '" + v + "'");
  return x;
}

int to_int(const std::string& name, const std::string& v) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ValidationError("flag --" + name + " expects an integer, got '" + v + "'");
  return static_cast<int>(x);
}

std::vector<double> to_double_list(const std::string& name, const std::string& v) {
  ConfigEntry e{"", name, v, 0};
  try {
    return detail::parse_double_list(e);
  } catch (const ValidationError&) {
    throw ValidationError("flag --" + name + " expects comma-separated numbers, got '" +
                          v + "'");
  }
}

void apply_config_flag(RunConfig& cfg, Args& args) {
  if (auto path = args.take("config")) {
    apply_config_entries(cfg, parse_config_file(*path));
  }
}

void apply_threads_flag(RunConfig& cfg, Args& args) {
  if (auto v = args.take("threads")) {
    cfg.threads = to_int("threads", *v);
  } else if (const char* env = std::getenv("VLEXP_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) cfg.threads = static_cast<int>(n);
  }
}

int finish(const RunConfig& cfg, const TargetResult& res) {
  std::fputs(res.summary.c_str(), stdout);
  std::printf("artifacts written to %s\n", cfg.out_dir.c_str());
  if (res.outcome != RunOutcome::completed) {
    std::fprintf(stderr, "numerical abort: %s\n", to_string(res.outcome));
    return 3;
  }
  return 0;
}

// Accept tableau names with or without the lawson_ prefix.
const ButcherTableau& tableau_by_flag(const std::string& name) {
  std::string base = name;
  if (base.rfind("lawson_", 0) == 0) base = base.substr(7);
  const ButcherTableau* tb = find_tableau(base);
  if (!tb)
    throw ValidationError("unknown tableau '" + name +
                          "' (expected rk22, rk32_best, rk33, or rk44)");
  return *tb;
}

int cmd_stab(Args& args) {
  if (args.pos.size() < 2)
    throw ValidationError("stab needs a subcommand: table1, table3, table4, domain, ymax");
  const std::string& sub = args.pos[1];

  if (sub == "table1" || sub == "table3" || sub == "table4") {
    RunConfig cfg = target_defaults(sub);
    apply_config_flag(cfg, args);
    cfg.out_dir = args.take("out").value_or("out/" + sub);
    apply_threads_flag(cfg, args);
    args.reject_leftovers();
    validate(cfg);
    return finish(cfg, reproduce(sub, cfg));
  }

  if (sub == "domain") {
    auto method = args.take("method");
    if (!method) throw ValidationError("stab domain needs --method");
    const ButcherTableau& tb = tableau_by_flag(*method);
    RunConfig cfg = experiment_defaults("");
    cfg.out_dir = args.take("out").value_or("out/stab_domain");
    apply_threads_flag(cfg, args);
    args.reject_leftovers();
    ensure_out_dir(cfg.out_dir);

    const int n_angles = 720;
    std::vector<double> angles(n_angles);
    for (int k = 0; k < n_angles; ++k) angles[k] = 2.0 * M_PI * (k + 1) / n_angles;
    const std::vector<cplx> pts = boundary_trace(tb, angles);
    const std::string name = "rk_domain_" + tb.name + ".csv";
    {
      CsvWriter csv(path_join(cfg.out_dir, name));
      csv.header({"angle", "re", "im"});
      for (int k = 0; k < n_angles; ++k)
        csv.row({angles[k], pts[k].real(), pts[k].imag()});
    }
    TargetResult res;
    res.artifacts = {name};
    res.summary = "boundary_points = " + std::to_string(n_angles) + "\n";
    write_manifest(cfg.out_dir, "stab_domain_" + tb.name, cfg, 0.0, res);
    return finish(cfg, res);
  }

  if (sub == "ymax") {
    auto method = args.take("method");
    if (!method) throw ValidationError("stab ymax needs --method");
    double eps = 1e-2;
    if (auto v = args.take("eps")) eps = to_double("eps", *v);
    args.take("threads");
    args.reject_leftovers();
    double y;
    if (method->rfind("lawson_", 0) == 0 || find_tableau(*method)) {
      y = ymax_lawson(tableau_by_flag(*method));
      std::printf("%s\n", g17(y).c_str());
    } else {
      y = ymax_exp(*method, eps).y_max;
      std::printf("%s\n", g17(y).c_str());
    }
    return 0;
  }

  throw ValidationError("unknown stab subcommand '" + sub + "'");
}

int cmd_tableau(Args& args) {
  if (args.pos.size() < 2) throw ValidationError("tableau needs a name");
  args.reject_leftovers();
  std::fputs(format_tableau(tableau_by_flag(args.pos[1])).c_str(), stdout);
  return 0;
}

int cmd_vp(Args& args) {
  if (args.pos.size() < 2 || args.pos[1] != "run")
    throw ValidationError("usage: vlexp vp run --case landau|bot|linear ...");
  auto kase = args.take("case");
  if (!kase) throw ValidationError("vp run needs --case landau|bot|linear");
  if (*kase != "landau" && *kase != "bot" && *kase != "linear")
    throw ValidationError("vp run: case must be landau, bot, or linear (got '" +
                          *kase + "')");

  RunConfig cfg = experiment_defaults(*kase);
  apply_config_flag(cfg, args);
  cfg.experiment = *kase;  // the explicit flag wins over a config-file key
  if (auto v = args.take("method")) {
    make_integrator(*v);
    cfg.method = *v;
  }
  if (auto v = args.take("vscheme")) {
    vscheme_from_name(*v);
    cfg.scheme = *v;
  }
  if (auto v = args.take("nx")) cfg.nx = to_int("nx", *v);
  if (auto v = args.take("nv")) cfg.nv = to_int("nv", *v);
  if (auto v = args.take("vmax")) cfg.vmax = to_double("vmax", *v);
  const auto dt = args.take("dt");
  const auto cfl = args.take("cfl");
  if (dt && cfl) throw ValidationError("vp run: give --dt or --cfl, not both");
  if (dt) {
    cfg.dt = to_double("dt", *dt);
    cfg.cfl_c = 0.0;
  }
  if (cfl) {
    cfg.cfl_c = to_double("cfl", *cfl);
    cfg.dt = 0.0;
  }
  if (auto v = args.take("dt-cap")) cfg.dt_cap = to_double("dt-cap", *v);
  if (auto v = args.take("tfinal")) cfg.tfinal = to_double("tfinal", *v);
  if (auto v = args.take("steps")) cfg.steps = to_int("steps", *v);
  if (auto v = args.take("eps")) cfg.eps = to_double("eps", *v);
  if (auto v = args.take("snapshots")) cfg.snapshot_times = to_double_list("snapshots", *v);
  cfg.out_dir = args.take("out").value_or("out/vp_" + *kase);
  apply_threads_flag(cfg, args);
  args.reject_leftovers();
  validate(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  TargetResult res = run_vp_case(cfg);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(cfg.out_dir, "vp_run", cfg, wall, res);
  return finish(cfg, res);
}

int cmd_dk(Args& args) {
  if (args.pos.size() < 2 || args.pos[1] != "run")
    throw ValidationError("usage: vlexp dk run --formulation direct|pert ...");

  RunConfig cfg = experiment_defaults("dk");
  apply_config_flag(cfg, args);
  if (auto v = args.take("formulation")) {
    dk_formulation_from_name(*v);
    cfg.formulation = *v;
  }
  if (auto v = args.take("method")) {
    make_integrator(*v);
    cfg.method = *v;
  }
  if (auto v = args.take("grid")) {
    const std::vector<double> g = to_double_list("grid", *v);
    if (g.size() != 4)
      throw ValidationError("flag --grid expects NR,NT,NZ,NV (four integers)");
    cfg.nr = static_cast<int>(g[0]);
    cfg.ntheta = static_cast<int>(g[1]);
    cfg.nz = static_cast<int>(g[2]);
    cfg.nv = static_cast<int>(g[3]);
  }
  if (auto v = args.take("controller")) {
    const std::string& s = *v;
    if (s.rfind("fixed:", 0) == 0) {
      cfg.adaptive = false;
      cfg.dt = to_double("controller", s.substr(6));
    } else if (s.rfind("richardson:", 0) == 0) {
      cfg.adaptive = true;
      const std::vector<double> p = to_double_list("controller", s.substr(11));
      if (p.empty() || p.size() > 2)
        throw ValidationError("flag --controller expects richardson:TOL[,DTMAX]");
      cfg.tol = p[0];
      if (p.size() == 2) cfg.dt_max = p[1];
    } else {
      throw ValidationError("flag --controller expects fixed:DT or richardson:TOL[,DTMAX]");
    }
  }
  if (auto v = args.take("tfinal")) cfg.tfinal = to_double("tfinal", *v);
  if (auto v = args.take("snapshots")) cfg.snapshot_times = to_double_list("snapshots", *v);
  cfg.out_dir = args.take("out").value_or("out/dk_run");
  apply_threads_flag(cfg, args);
  args.reject_leftovers();
  validate(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  TargetResult res = run_dk_case(cfg);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(cfg.out_dir, "dk_run", cfg, wall, res);
  return finish(cfg, res);
}

int cmd_reproduce(Args& args) {
  if (args.pos.size() < 2) {
    std::string msg = "reproduce needs a target (one of:";
    for (const std::string& t : reproduce_targets()) msg += " " + t;
    throw ValidationError(msg + ")");
  }
  const std::string& target = args.pos[1];
  RunConfig cfg = target_defaults(target);  // throws for unknown targets
  apply_config_flag(cfg, args);
  cfg.out_dir = args.take("out").value_or("out/" + target);
  apply_threads_flag(cfg, args);
  args.reject_leftovers();
  validate(cfg);
  return finish(cfg, reproduce(target, cfg));
}

int run(int argc, char** argv) {
  Args args;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--help" || a == "-h") {
      std::printf(kUsage, version);
      return 0;
    }
    if (a == "--version") {
      std::printf("vlexp %s\n", version);
      return 0;
    }
    if (a.rfind("--", 0) == 0) {
      if (i + 1 >= argc)
        throw ValidationError("flag " + a + " needs a value");
      args.flags[a.substr(2)] = argv[++i];
    } else {
      args.pos.push_back(a);
    }
  }
  if (args.pos.empty()) {
    std::fprintf(stderr, kUsage, version);
    return 2;
  }
  const std::string& cmd = args.pos[0];
  if (cmd == "stab") return cmd_stab(args);
  if (cmd == "tableau") return cmd_tableau(args);
  if (cmd == "vp") return cmd_vp(args);
  if (cmd == "dk") return cmd_dk(args);
  if (cmd == "reproduce") return cmd_reproduce(args);
  throw ValidationError("unknown subcommand '" + cmd +
                        "' (expected stab, tableau, vp, dk, or reproduce)");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const vlexp::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
