#pragma once

// Structured text run configuration: `key = value` lines grouped by optional
// `[section]` headers, `#`/`;` comments.  Sections are organizational only;
// key names are globally unique.  Unknown keys and unknown sections are hard
// errors carrying the offending line number, so a typo can never silently
// fall back to a default.  An empty file plus an experiment name yields that
// experiment's full default parameter set.

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vlexp/dk.hpp"
#include "vlexp/integrators.hpp"
#include "vlexp/util.hpp"
#include "vlexp/vp.hpp"

namespace vlexp {

// Everything a run needs: experiment selection, method/scheme, grid sizes,
// domain parameters, time control (exactly one of fixed dt / CFL rule /
// adaptive tolerance drives the step), output directory, snapshot schedule.
struct RunConfig {
  std::string experiment;  // landau | bot | linear | dk
  std::string method = "lawson_rk44";
  std::string scheme = "weno5";      // velocity discretization (1D1V runs)
  std::string formulation = "pert";  // direct | pert (4D runs)

  // 1D1V grid.
  int nx = 81;
  int nv = 128;
  double vmax = 8.0;

  // 4D grid and domain.
  int nr = 32, ntheta = 32, nz = 32;
  double r_min = 0.1, r_max = 14.5, zlen = 1506.759067;

  // Constant-coefficient transport experiment.
  double d = 1.0, b = 1.0;
  int steps = 100;
  double eps = 1e-2;  // stability-domain relaxation parameter

  // Perturbation seeded into the 4D equilibrium.
  double ic_eps = 1e-6;
  int ic_m = 5, ic_n = 1;

  // Time control.
  double dt = 0.0;      // > 0: fixed step
  double cfl_c = 0.0;   // > 0: dt = C dv / |E|_inf each step
  double dt_cap = 0.0;  // > 0: accuracy cap on the CFL rule
  bool adaptive = false;
  double tol = 1e-2;
  double dt0 = 1.0;
  double dt_max = 40.0;
  double safety = 0.8;
  int reject_cap = 50;
  bool classical_richardson = false;
  double tfinal = 40.0;

  // Output.
  std::string out_dir = "out";
  std::vector<double> snapshot_times;
  int threads = 1;
};

struct ConfigEntry {
  std::string section, key, value;
  int line = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_double(const ConfigEntry& e) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0')
    throw ValidationError("config line " + std::to_string(e.line) + ": '" + e.key +
                          "' expects a number, got '" + e.value + "'");
  return v;
}

inline int parse_int(const ConfigEntry& e) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0')
    throw ValidationError("config line " + std::to_string(e.line) + ": '" + e.key +
                          "' expects an integer, got '" + e.value + "'");
  return static_cast<int>(v);
}

inline bool parse_bool(const ConfigEntry& e) {
  const std::string& v = e.value;
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ValidationError("config line " + std::to_string(e.line) + ": '" + e.key +
                        "' expects true/false, got '" + v + "'");
}

inline std::vector<double> parse_double_list(const ConfigEntry& e) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const char* s = item.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
      throw ValidationError("config line " + std::to_string(e.line) + ": '" + e.key +
                            "' expects comma-separated numbers, got '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

// Parse the raw text into (section, key, value, line) entries; throws a
// line-numbered error on anything that is neither blank, comment, section
// header, nor key = value.
inline std::vector<ConfigEntry> parse_config_text(const std::string& text) {
  static const char* sections[] = {"run", "grid", "domain", "ic",
                                   "time", "controller", "output"};
  std::vector<ConfigEntry> entries;
  std::istringstream in(text);
  std::string raw, section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::size_t cut = raw.find_first_of("#;");
    std::string line = detail::trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError("config line " + std::to_string(lineno) +
                              ": unterminated section header '" + line + "'");
      section = detail::trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const char* s : sections) known = known || section == s;
      if (!known)
        throw ValidationError("config line " + std::to_string(lineno) +
                              ": unknown section '" + section + "'");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) +
                            ": expected key = value, got '" + line + "'");
    ConfigEntry e;
    e.section = section;
    e.key = detail::trim(line.substr(0, eq));
    e.value = detail::trim(line.substr(eq + 1));
    e.line = lineno;
    if (e.key.empty())
      throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
    entries.push_back(std::move(e));
  }
  return entries;
}

inline std::vector<ConfigEntry> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// Default parameter sets of the named experiments.
inline RunConfig experiment_defaults(const std::string& name) {
  RunConfig c;
  c.experiment = name;
  if (name == "landau") {
    c.method = "lawson_rk44";
    c.scheme = "weno5";
    c.nx = 81;
    c.nv = 128;
    c.vmax = 8.0;
    c.dt = 0.125;
    c.tfinal = 40.0;
  } else if (name == "bot") {
    c.method = "lawson_rk44";
    c.scheme = "cd2";
    c.nx = 135;
    c.nv = 256;
    c.vmax = 8.0;
    c.cfl_c = 2.0 * std::sqrt(2.0);  // CFL number of the method/scheme pair
    c.dt_cap = 0.1;                  // accuracy cap of the step rule
    c.tfinal = 40.0;
  } else if (name == "linear") {
    c.method = "hochbruck_ostermann";
    c.nx = 64;
    c.nv = 64;
    c.vmax = 3.0;
    c.d = 1.0;
    c.b = 1.0;
    c.steps = 100;
    c.eps = 1e-2;
  } else if (name == "dk") {
    c.method = "lawson_rk44";
    c.formulation = "pert";
    c.nr = 32;
    c.ntheta = 32;
    c.nz = 32;
    c.nv = 64;
    c.vmax = 7.32;
    c.adaptive = true;
    c.tol = 1e-2;
    c.dt0 = 1.0;
    c.dt_max = 40.0;
    c.tfinal = 3000.0;
  } else if (!name.empty()) {
    throw ValidationError("unknown experiment '" + name +
                          "' (expected landau, bot, linear, or dk)");
  }
  return c;
}

// Apply parsed entries onto cfg.  Unknown keys are hard errors with the
// offending line number.  The `experiment` key is accepted but does not
// re-trigger defaults here; config_load resolves it up front.
inline void apply_config_entries(RunConfig& cfg, const std::vector<ConfigEntry>& entries) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_double_list;
  using detail::parse_int;
  for (const ConfigEntry& e : entries) {
    const std::string& k = e.key;
    if (k == "experiment") {
      experiment_defaults(e.value);  // validates the name
      cfg.experiment = e.value;
    } else if (k == "method") {
      make_integrator(e.value);  // validates the name
      cfg.method = e.value;
    } else if (k == "scheme") {
      vscheme_from_name(e.value);
      cfg.scheme = e.value;
    } else if (k == "formulation") {
      dk_formulation_from_name(e.value);
      cfg.formulation = e.value;
    } else if (k == "nx") {
      cfg.nx = parse_int(e);
    } else if (k == "nv") {
      cfg.nv = parse_int(e);
    } else if (k == "vmax") {
      cfg.vmax = parse_double(e);
    } else if (k == "nr") {
      cfg.nr = parse_int(e);
    } else if (k == "ntheta") {
      cfg.ntheta = parse_int(e);
    } else if (k == "nz") {
      cfg.nz = parse_int(e);
    } else if (k == "r_min") {
      cfg.r_min = parse_double(e);
    } else if (k == "r_max") {
      cfg.r_max = parse_double(e);
    } else if (k == "zlen") {
      cfg.zlen = parse_double(e);
    } else if (k == "d") {
      cfg.d = parse_double(e);
    } else if (k == "b") {
      cfg.b = parse_double(e);
    } else if (k == "steps") {
      cfg.steps = parse_int(e);
    } else if (k == "eps") {
      cfg.eps = parse_double(e);
    } else if (k == "ic_eps") {
      cfg.ic_eps = parse_double(e);
    } else if (k == "ic_m") {
      cfg.ic_m = parse_int(e);
    } else if (k == "ic_n") {
      cfg.ic_n = parse_int(e);
    } else if (k == "dt") {
      cfg.dt = parse_double(e);
    } else if (k == "cfl_c") {
      cfg.cfl_c = parse_double(e);
    } else if (k == "dt_cap") {
      cfg.dt_cap = parse_double(e);
    } else if (k == "adaptive") {
      cfg.adaptive = parse_bool(e);
    } else if (k == "tol") {
      cfg.tol = parse_double(e);
    } else if (k == "dt0") {
      cfg.dt0 = parse_double(e);
    } else if (k == "dt_max") {
      cfg.dt_max = parse_double(e);
    } else if (k == "safety") {
      cfg.safety = parse_double(e);
    } else if (k == "reject_cap") {
      cfg.reject_cap = parse_int(e);
    } else if (k == "classical_richardson") {
      cfg.classical_richardson = parse_bool(e);
    } else if (k == "tfinal") {
      cfg.tfinal = parse_double(e);
    } else if (k == "out") {
      cfg.out_dir = e.value;
    } else if (k == "snapshots") {
      cfg.snapshot_times = parse_double_list(e);
    } else if (k == "threads") {
      cfg.threads = parse_int(e);
    } else {
      throw ValidationError("config line " + std::to_string(e.line) +
                            ": unknown key '" + k + "'");
    }
  }
}

// Domain validation shared by every entry path (file, CLI flags, defaults).
inline void validate(const RunConfig& c) {
  auto bad = [](const std::string& msg) { throw ValidationError("config: " + msg); };
  if (c.nx < 3) bad("nx must be >= 3");
  if (c.nv < 3) bad("nv must be >= 3 (got " + std::to_string(c.nv) + ")");
  if (!(c.vmax > 0.0)) bad("vmax must be positive");
  if (c.nr < 3) bad("nr must be >= 3");
  if (c.ntheta < 4) bad("ntheta must be >= 4");
  if (c.nz < 2) bad("nz must be >= 2");
  if (!(c.r_min > 0.0)) bad("r_min must be positive");
  if (!(c.r_max > c.r_min)) bad("r_max must exceed r_min");
  if (!(c.zlen > 0.0)) bad("zlen must be positive");
  if (c.steps < 1) bad("steps must be >= 1");
  if (c.eps < 0.0) bad("eps must be non-negative");
  if (!(c.ic_eps >= 0.0)) bad("ic_eps must be non-negative");
  if (c.dt < 0.0) bad("dt must be non-negative");
  if (c.cfl_c < 0.0) bad("cfl_c must be non-negative");
  if (c.dt_cap < 0.0) bad("dt_cap must be non-negative");
  if (!(c.tol > 0.0)) bad("tol must be positive");
  if (!(c.dt0 > 0.0)) bad("dt0 must be positive");
  if (!(c.dt_max > 0.0)) bad("dt_max must be positive");
  if (!(c.safety > 0.0 && c.safety <= 1.0)) bad("safety must lie in (0, 1]");
  if (c.reject_cap < 1) bad("reject_cap must be >= 1");
  if (!(c.tfinal > 0.0)) bad("tfinal must be positive");
  if (c.threads < 1) bad("threads must be >= 1");
  for (std::size_t i = 1; i < c.snapshot_times.size(); ++i)
    if (!(c.snapshot_times[i] > c.snapshot_times[i - 1]))
      bad("snapshot times must be strictly increasing");
  if (!c.snapshot_times.empty() && c.snapshot_times.front() < 0.0)
    bad("snapshot times must be non-negative");
}

// Load a config file on top of an experiment's defaults.  The experiment can
// come from the file itself (an `experiment` key) or from the second
// argument; the file's other keys are applied after the defaults.
inline RunConfig config_load(const std::string& path, std::string experiment = "") {
  const std::vector<ConfigEntry> entries = parse_config_file(path);
  for (const ConfigEntry& e : entries)
    if (e.key == "experiment") experiment = e.value;
  RunConfig cfg = experiment_defaults(experiment);
  apply_config_entries(cfg, entries);
  validate(cfg);
  return cfg;
}

// Flat echo of every effective parameter, used for the run manifest.
inline std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& c) {
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("experiment", c.experiment);
  kv.emplace_back("method", c.method);
  kv.emplace_back("scheme", c.scheme);
  kv.emplace_back("formulation", c.formulation);
  kv.emplace_back("nx", std::to_string(c.nx));
  kv.emplace_back("nv", std::to_string(c.nv));
  kv.emplace_back("vmax", num(c.vmax));
  kv.emplace_back("nr", std::to_string(c.nr));
  kv.emplace_back("ntheta", std::to_string(c.ntheta));
  kv.emplace_back("nz", std::to_string(c.nz));
  kv.emplace_back("r_min", num(c.r_min));
  kv.emplace_back("r_max", num(c.r_max));
  kv.emplace_back("zlen", num(c.zlen));
  kv.emplace_back("d", num(c.d));
  kv.emplace_back("b", num(c.b));
  kv.emplace_back("steps", std::to_string(c.steps));
  kv.emplace_back("eps", num(c.eps));
  kv.emplace_back("ic_eps", num(c.ic_eps));
  kv.emplace_back("ic_m", std::to_string(c.ic_m));
  kv.emplace_back("ic_n", std::to_string(c.ic_n));
  kv.emplace_back("dt", num(c.dt));
  kv.emplace_back("cfl_c", num(c.cfl_c));
  kv.emplace_back("dt_cap", num(c.dt_cap));
  kv.emplace_back("adaptive", c.adaptive ? "true" : "false");
  kv.emplace_back("tol", num(c.tol));
  kv.emplace_back("dt0", num(c.dt0));
  kv.emplace_back("dt_max", num(c.dt_max));
  kv.emplace_back("safety", num(c.safety));
  kv.emplace_back("reject_cap", std::to_string(c.reject_cap));
  kv.emplace_back("classical_richardson", c.classical_richardson ? "true" : "false");
  kv.emplace_back("tfinal", num(c.tfinal));
  kv.emplace_back("out", c.out_dir);
  {
    std::string s;
    for (std::size_t i = 0; i < c.snapshot_times.size(); ++i) {
      if (i) s += ',';
      s += num(c.snapshot_times[i]);
    }
    kv.emplace_back("snapshots", s);
  }
  kv.emplace_back("threads", std::to_string(c.threads));
  return kv;
}

}  // namespace vlexp
