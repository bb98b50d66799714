#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vlexp/config.hpp"
#include "vlexp/csv.hpp"
#include "vlexp/experiments.hpp"

using namespace vlexp;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

std::string fresh_dir(const std::string& tag) {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / ("vlexp_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("17-digit formatting round-trips every double exactly", "[csv]") {
  const double values[] = {0.0,     0.1,   1.0 / 3.0, -0.153, 2.0 / 3.0,
                           1e-300,  1e300, 5e-324,    M_PI,   -2.5,
                           0.052 * 1.73,   1.0 + 2.220446049250313e-16};
  for (double x : values) {
    const std::string s = g17(x);
    char* end = nullptr;
    const double back = std::strtod(s.c_str(), &end);
    INFO("formatted '" << s << "'");
    CHECK(*end == '\0');
    CHECK(back == x);  // bitwise identical, no tolerance
  }
  CHECK(g17(1.5) == "1.5");
  CHECK(g17(2.0) == "2");
}

TEST_CASE("csv writer emits rows, labels, and verbatim lines", "[csv]") {
  const std::string dir = fresh_dir("csv");
  const std::string path = dir + "/t.csv";
  {
    CsvWriter csv(path);
    csv.header({"a", "b"});
    csv.row({1.5, 2.5});
    csv.row("lbl", {0.25});
    csv.line("# marker");
  }
  CHECK(slurp(path) == "a,b\n1.5,2.5\nlbl,0.25\n# marker\n");
  CHECK_THROWS_AS(CsvWriter(dir + "/no_such_subdir/t.csv"), ValidationError);
  CHECK_THROWS_AS(write_text_file(dir + "/no_such_subdir/t.txt", "x"),
                  ValidationError);
}

TEST_CASE("binary artifact is a raw row of doubles", "[csv]") {
  const std::string dir = fresh_dir("bin");
  const std::string path = dir + "/payload.bin";
  const std::vector<double> v = {1.0, -2.5, 1e-300};
  write_binary_doubles(path, v);
  REQUIRE(std::filesystem::file_size(path) == v.size() * sizeof(double));
  std::ifstream in(path, std::ios::binary);
  std::vector<double> back(v.size());
  in.read(reinterpret_cast<char*>(back.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  CHECK(back == v);
}

TEST_CASE("config text splits into line-numbered entries", "[config]") {
  const std::string text =
      "# heading\n"
      "[run]\n"
      "experiment = landau   # trailing comment\n"
      "method=lawson_rk33\n"
      "\n"
      "[time]\n"
      "dt = 0.5 ; other comment style\n";
  const std::vector<ConfigEntry> e = parse_config_text(text);
  REQUIRE(e.size() == 3);
  CHECK(e[0].section == "run");
  CHECK(e[0].key == "experiment");
  CHECK(e[0].value == "landau");
  CHECK(e[0].line == 3);
  CHECK(e[1].key == "method");
  CHECK(e[1].value == "lawson_rk33");
  CHECK(e[1].line == 4);
  CHECK(e[2].section == "time");
  CHECK(e[2].key == "dt");
  CHECK(e[2].value == "0.5");
  CHECK(e[2].line == 7);
}

TEST_CASE("config syntax errors carry the offending line number", "[config]") {
  CHECK_THROWS_WITH(parse_config_text("just words\n"),
                    ContainsSubstring("line 1") &&
                        ContainsSubstring("expected key = value"));
  CHECK_THROWS_WITH(parse_config_text("\n[nope]\n"),
                    ContainsSubstring("line 2") &&
                        ContainsSubstring("unknown section 'nope'"));
  CHECK_THROWS_WITH(parse_config_text("[run\n"),
                    ContainsSubstring("unterminated section header"));
  CHECK_THROWS_WITH(parse_config_text("\n\n= 3\n"),
                    ContainsSubstring("line 3") && ContainsSubstring("empty key"));
}

TEST_CASE("unknown keys and bad value types are hard errors", "[config]") {
  RunConfig cfg;
  CHECK_THROWS_WITH(
      apply_config_entries(cfg, parse_config_text("nx = 5\nfoo = 1\n")),
      ContainsSubstring("line 2") && ContainsSubstring("unknown key 'foo'"));
  CHECK_THROWS_WITH(apply_config_entries(cfg, parse_config_text("nx = abc\n")),
                    ContainsSubstring("expects an integer"));
  CHECK_THROWS_WITH(apply_config_entries(cfg, parse_config_text("vmax = abc\n")),
                    ContainsSubstring("expects a number"));
  CHECK_THROWS_WITH(
      apply_config_entries(cfg, parse_config_text("adaptive = maybe\n")),
      ContainsSubstring("expects true/false"));
  CHECK_THROWS_AS(
      apply_config_entries(cfg, parse_config_text("snapshots = 1, x\n")),
      ValidationError);
  CHECK_THROWS_AS(apply_config_entries(cfg, parse_config_text("method = nope\n")),
                  ValidationError);
  CHECK_THROWS_AS(apply_config_entries(cfg, parse_config_text("scheme = nope\n")),
                  ValidationError);
  CHECK_THROWS_AS(
      apply_config_entries(cfg, parse_config_text("formulation = nope\n")),
      ValidationError);
  // Nothing above may have modified cfg past the successful first line.
  CHECK(cfg.nx == 5);
}

TEST_CASE("experiment defaults carry the published parameter sets", "[config]") {
  const RunConfig landau = experiment_defaults("landau");
  CHECK(landau.method == "lawson_rk44");
  CHECK(landau.scheme == "weno5");
  CHECK(landau.nx == 81);
  CHECK(landau.nv == 128);
  CHECK(landau.vmax == 8.0);
  CHECK(landau.dt == 0.125);
  CHECK(landau.tfinal == 40.0);

  const RunConfig bot = experiment_defaults("bot");
  CHECK(bot.scheme == "cd2");
  CHECK(bot.nx == 135);
  CHECK(bot.nv == 256);
  CHECK(bot.dt == 0.0);  // field-driven step rule, not a fixed step
  CHECK_THAT(bot.cfl_c, WithinAbs(2.0 * std::sqrt(2.0), 1e-15));
  CHECK(bot.dt_cap == 0.1);

  const RunConfig lin = experiment_defaults("linear");
  CHECK(lin.method == "hochbruck_ostermann");
  CHECK(lin.d == 1.0);
  CHECK(lin.b == 1.0);
  CHECK(lin.vmax == 3.0);
  CHECK(lin.steps == 100);
  CHECK(lin.eps == 1e-2);

  const RunConfig dk = experiment_defaults("dk");
  CHECK(dk.formulation == "pert");
  CHECK(dk.nr == 32);
  CHECK(dk.ntheta == 32);
  CHECK(dk.nz == 32);
  CHECK(dk.nv == 64);
  CHECK(dk.vmax == 7.32);
  CHECK(dk.adaptive);
  CHECK(dk.tol == 1e-2);
  CHECK(dk.dt0 == 1.0);
  CHECK(dk.dt_max == 40.0);
  CHECK(dk.tfinal == 3000.0);

  CHECK_NOTHROW(experiment_defaults(""));
  CHECK_THROWS_WITH(experiment_defaults("nope"),
                    ContainsSubstring("unknown experiment 'nope'"));
}

TEST_CASE("config file loads on top of the experiment defaults", "[config]") {
  const std::string dir = fresh_dir("cfgload");
  const std::string path = dir + "/run.cfg";
  write_text_file(path,
                  "[grid]\n"
                  "nv = 256\n"
                  "[run]\n"
                  "experiment = landau\n");  // experiment key found anywhere
  const RunConfig cfg = config_load(path);
  CHECK(cfg.experiment == "landau");
  CHECK(cfg.nx == 81);     // landau default
  CHECK(cfg.nv == 256);    // file override
  CHECK(cfg.dt == 0.125);  // landau default

  write_text_file(path, "experiment = landau\nnv = 2\n");
  CHECK_THROWS_WITH(config_load(path), ContainsSubstring("nv must be >= 3"));
  CHECK_THROWS_WITH(config_load(dir + "/missing.cfg"),
                    ContainsSubstring("cannot read config file"));
}

TEST_CASE("run configuration validation rejects out-of-domain values", "[config]") {
  CHECK_NOTHROW(validate(experiment_defaults("landau")));
  auto broke = [](auto mutate) {
    RunConfig c = experiment_defaults("landau");
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(validate(broke([](RunConfig& c) { c.nx = 2; })), ValidationError);
  CHECK_THROWS_AS(validate(broke([](RunConfig& c) { c.vmax = 0.0; })),
                  ValidationError);
  CHECK_THROWS_AS(validate(broke([](RunConfig& c) { c.safety = 0.0; })),
                  ValidationError);
  CHECK_THROWS_AS(validate(broke([](RunConfig& c) { c.safety = 1.5; })),
                  ValidationError);
  CHECK_THROWS_AS(validate(broke([](RunConfig& c) { c.tol = 0.0; })),
                  ValidationError);
  CHECK_THROWS_AS(validate(broke([](RunConfig& c) { c.r_max = c.r_min; })),
                  ValidationError);
  CHECK_THROWS_AS(
      validate(broke([](RunConfig& c) { c.snapshot_times = {3.0, 2.0}; })),
      ValidationError);
  CHECK_THROWS_AS(
      validate(broke([](RunConfig& c) { c.snapshot_times = {-1.0, 2.0}; })),
      ValidationError);
  CHECK_THROWS_AS(validate(broke([](RunConfig& c) { c.threads = 0; })),
                  ValidationError);
}

TEST_CASE("config echo round-trips through the parser", "[config]") {
  RunConfig cfg = experiment_defaults("bot");
  cfg.snapshot_times = {0.0, 20.5};
  cfg.out_dir = "elsewhere";
  cfg.adaptive = true;
  const auto kv = config_echo(cfg);
  CHECK(kv.size() == 34);  // one line per RunConfig field

  std::vector<ConfigEntry> entries;
  int line = 1;
  for (const auto& [k, v] : kv) entries.push_back({"", k, v, line++});
  RunConfig back = experiment_defaults("");
  apply_config_entries(back, entries);
  CHECK(config_echo(back) == kv);
}

TEST_CASE("reproduce target defaults select the published setups", "[experiments]") {
  CHECK(reproduce_targets().size() == 14);

  const RunConfig cons = target_defaults("dk_conservation");
  CHECK(cons.nr == 16);
  CHECK(cons.ntheta == 16);
  CHECK(cons.nz == 8);
  CHECK(cons.nv == 32);
  CHECK(cons.tfinal == 400.0);

  const RunConfig cfl = target_defaults("cfl_sharpness");
  CHECK(cfl.experiment == "bot");
  CHECK(cfl.nx == 81);
  CHECK(cfl.nv == 512);

  const RunConfig snaps = target_defaults("bot_snapshots");
  CHECK(snaps.snapshot_times == std::vector<double>{0.0, 20.0, 30.0, 40.0});

  CHECK(target_defaults("dk_coarse_direct").formulation == "direct");
  CHECK(target_defaults("dk_coarse_pert").formulation == "pert");
  CHECK(target_defaults("table1").experiment.empty());

  CHECK_THROWS_WITH(target_defaults("nope"),
                    ContainsSubstring("unknown reproduce target 'nope'") &&
                        ContainsSubstring("cfl_sharpness"));
}

TEST_CASE("table of Lawson CFL numbers reproduces with a manifest", "[experiments]") {
  RunConfig cfg = target_defaults("table1");
  cfg.out_dir = fresh_dir("table1");
  const TargetResult res = reproduce("table1", cfg);
  CHECK(res.outcome == RunOutcome::completed);
  for (const char* name : {"table1.csv", "table1.txt", "manifest.txt"})
    CHECK(std::filesystem::exists(cfg.out_dir + "/" + name));

  const std::string csv = slurp(cfg.out_dir + "/table1.csv");
  CHECK_THAT(csv, ContainsSubstring("method,y_max"));
  CHECK_THAT(csv, ContainsSubstring("lawson_rk44,2.8284271"));

  const std::string manifest = slurp(cfg.out_dir + "/manifest.txt");
  CHECK_THAT(manifest, ContainsSubstring("target = table1"));
  CHECK_THAT(manifest, ContainsSubstring("outcome = completed"));
  CHECK_THAT(manifest, ContainsSubstring("wall_seconds = "));
  CHECK_THAT(manifest, ContainsSubstring("[config]"));
  CHECK_THAT(manifest, ContainsSubstring("[artifacts]"));
  CHECK_THAT(manifest, ContainsSubstring("table1.csv"));
}

TEST_CASE("constant-coefficient run writes the growth-ratio table", "[experiments]") {
  RunConfig cfg = experiment_defaults("linear");
  cfg.nx = 32;
  cfg.nv = 32;
  cfg.steps = 10;
  cfg.out_dir = fresh_dir("linear");
  const TargetResult res = run_vp_case(cfg);
  CHECK(res.outcome == RunOutcome::completed);
  REQUIRE(std::filesystem::exists(cfg.out_dir + "/ratio.csv"));
  const std::string csv = slurp(cfg.out_dir + "/ratio.csv");
  CHECK_THAT(csv, ContainsSubstring("n,t,ratio,bound"));
  // Header plus one row per step plus the initial row.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == cfg.steps + 2);
  CHECK_THAT(res.summary, ContainsSubstring("final_ratio"));
}
