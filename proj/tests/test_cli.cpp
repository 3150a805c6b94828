#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "thermoscheme/run.hpp"
#include "thermoscheme/shift.hpp"

using namespace thermoscheme;

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = run_command(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::path("cli_scratch") / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config text round-trips and threads stay out of the hash") {
  RunConfig cfg;
  apply_preset(cfg, "doubling-refined");
  cfg.t = 1.25;
  cfg.seed = 777;
  cfg.observable2 = "cos2pi";
  std::string text = config_to_text(cfg);
  RunConfig back = config_from_text(text);
  CHECK(config_to_text(back) == text);
  CHECK(config_hash(back) == config_hash(cfg));

  RunConfig t8 = cfg;
  t8.threads = 8;
  CHECK(config_to_text(t8) == text);
  CHECK(config_hash(t8) == config_hash(cfg));
  CHECK(config_from_text("threads=6\n").threads == 6);

  RunConfig other = cfg;
  other.t = 1.5;
  CHECK(config_hash(other) != config_hash(cfg));
}

TEST_CASE("presets seed the map and scheme fields") {
  RunConfig cfg;
  apply_preset(cfg, "unimodal-a2eps");
  CHECK(cfg.map_kind == "quadratic");
  CHECK(cfg.a == 1.999);
  CHECK(cfg.variant == "unimodal");
  CHECK(cfg.truncation == 12);
  CHECK_THROWS_AS(apply_preset(cfg, "nope"), Error);

  RunConfig fromtext = config_from_text("preset=doubling-refined\ntruncation=7\n");
  CHECK(fromtext.variant == "refined");
  CHECK(fromtext.truncation == 7);

  CHECK_THROWS_AS(config_from_text("wibble=1\n"), Error);
  CHECK_THROWS_AS(config_from_text("just a line\n"), Error);
}

TEST_CASE("validate rejects out-of-range configs without naming a hypothesis") {
  RunConfig cfg;
  validate(cfg);

  auto expect_bad = [](RunConfig bad) {
    try {
      validate(bad);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.cond() == Cond::BadConfig);
      CHECK(e.hypothesis().empty());
    }
  };
  RunConfig bad = cfg;
  bad.truncation = 3;
  expect_bad(bad);
  bad = cfg;
  bad.eps_h1 = 0.0;
  expect_bad(bad);
  bad = cfg;
  bad.delta_crit = -1.0;
  expect_bad(bad);
  bad = cfg;
  bad.map_kind = "circle";
  expect_bad(bad);
  bad = cfg;
  bad.variant = "unimodal";  // map stays doubling
  expect_bad(bad);
  bad = cfg;
  bad.n = 0;
  expect_bad(bad);
}

TEST_CASE("measure csv parses back to the same weights") {
  auto bern = first_symbol_potential({std::log(0.3), std::log(0.7)});
  CylinderMeasure m = gibbs_weights(bern, 2);
  std::string csv = cylinder_measure_to_csv(m);
  CylinderMeasure back = measure_from_csv("# stamp line\n" + csv);
  CHECK(back.depth == m.depth);
  CHECK(back.alphabet == m.alphabet);
  CHECK(back.P_G == m.P_G);
  CHECK(back.C1 == m.C1);
  CHECK(back.C2 == m.C2);
  REQUIRE(back.weights.size() == m.weights.size());
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    CHECK(back.weights[i].first == m.weights[i].first);
    CHECK(back.weights[i].second == m.weights[i].second);
  }

  CHECK_THROWS_AS(measure_from_csv("word,weight\n0,1\n"), Error);
  CHECK_THROWS_AS(measure_from_csv("P_G,C1,C2,leakage\n0,1,1,0\nword,weight\n"), Error);
}

TEST_CASE("scheme build writes stamped artifacts and reruns byte-identically") {
  fs::path dir = scratch("build");
  std::vector<std::string> args = {"scheme", "build", "--preset", "doubling-plain",
                                   "--out", dir.string()};
  CliResult r = run(args);
  CHECK(r.code == 0);
  CHECK(r.out.find("alphabet 30") != std::string::npos);
  REQUIRE(fs::exists(dir / "config.txt"));
  REQUIRE(fs::exists(dir / "scheme.json"));
  std::string j = slurp(dir / "scheme.json");
  CHECK(j.find("config_hash") != std::string::npos);
  CHECK(j.find("tau_note") != std::string::npos);

  RunConfig cfg;
  apply_preset(cfg, "doubling-plain");
  cfg.out_dir = dir.string();
  CHECK(slurp(dir / "config.txt") == config_to_text(cfg));
  CHECK(j.find(config_hash(cfg)) != std::string::npos);

  std::string before = j;
  CliResult again = run(args);
  CHECK(again.code == 0);
  CHECK(slurp(dir / "scheme.json") == before);
  CHECK(again.out == r.out);
}

TEST_CASE("liftability verdicts through the cli") {
  CliResult r = run({"thermo", "liftability", "--preset", "doubling-refined", "--out",
                     scratch("lift-refined").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("not-liftable") != std::string::npos);

  CliResult p = run({"thermo", "liftability", "--preset", "doubling-plain", "--out",
                     scratch("lift-plain").string()});
  CHECK(p.code == 0);
  CHECK(p.out.find("verdict: liftable") != std::string::npos);
}

TEST_CASE("config errors exit 2") {
  CliResult bad_preset = run({"scheme", "build", "--preset", "nope", "--out",
                              scratch("bad1").string()});
  CHECK(bad_preset.code == 2);
  CHECK(bad_preset.err.find("unknown preset") != std::string::npos);

  CliResult shallow = run({"scheme", "build", "--preset", "doubling-plain", "--truncation", "3",
                           "--out", scratch("bad2").string()});
  CHECK(shallow.code == 2);
  CHECK(shallow.err.find("truncation") != std::string::npos);

  CliResult verb = run({"bogus-verb"});
  CHECK(verb.code == 2);

  CliResult missing = run({"scheme", "build", "--config", "no_such_file.cfg", "--out",
                           scratch("bad3").string()});
  CHECK(missing.code == 2);

  CliResult help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("scheme") != std::string::npos);
  CHECK(help.out.find("verify-all") != std::string::npos);
}

TEST_CASE("admissibility refusals exit 3 and name the condition") {
  CliResult r = run({"thermo", "equilibrium", "--preset", "doubling-refined", "--potential",
                     "constant", "--c", "-2", "--out", scratch("refuse").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("(P3)") != std::string::npos);

  CliResult u = run({"thermo", "equilibrium", "--preset", "unimodal-a2eps", "--t", "60", "--out",
                     scratch("refuse-uni").string()});
  CHECK(u.code == 3);
  CHECK(u.err.find("(P") != std::string::npos);

  // both expansion constants coincide on the dyadic scheme, so every t is
  // certified and large t still runs
  CliResult p = run({"thermo", "equilibrium", "--preset", "doubling-plain", "--t", "2.5", "--out",
                     scratch("t25").string()});
  CHECK(p.code == 0);
  CHECK(p.out.find("Q = ") != std::string::npos);
}

TEST_CASE("scheme verify exits 3 naming (H1) when the tolerance is tightened") {
  CliResult ok = run({"scheme", "verify", "--preset", "unimodal-a2eps", "--out",
                      scratch("verify-ok").string()});
  CHECK(ok.code == 0);

  // the unimodal endpoint defect is ~5e-12: below the default tolerance but
  // nonzero, so an eps_h1 under it must turn into a named refusal
  CliResult tight = run({"scheme", "verify", "--preset", "unimodal-a2eps", "--eps-h1", "1e-13",
                         "--out", scratch("verify-tight").string()});
  CHECK(tight.code == 3);
  CHECK(tight.err.find("(H1)") != std::string::npos);

  CliResult plain = run({"scheme", "verify", "--preset", "doubling-plain", "--out",
                         scratch("verify-plain").string()});
  CHECK(plain.code == 0);
  CHECK(plain.out.find("lambda1 = 2") != std::string::npos);
}

TEST_CASE("equilibrium artifacts embed the config hash and tau note") {
  fs::path dir = scratch("eq-stamp");
  CliResult r = run({"thermo", "equilibrium", "--preset", "doubling-plain", "--out", dir.string()});
  CHECK(r.code == 0);
  REQUIRE(fs::exists(dir / "measure.csv"));
  REQUIRE(fs::exists(dir / "tower.csv"));
  REQUIRE(fs::exists(dir / "equilibrium.json"));

  RunConfig cfg;
  apply_preset(cfg, "doubling-plain");
  cfg.out_dir = dir.string();
  std::string stamp = "# config " + config_hash(cfg) + "\n";
  CHECK(slurp(dir / "measure.csv").rfind(stamp, 0) == 0);
  CHECK(slurp(dir / "tower.csv").rfind(stamp, 0) == 0);
  std::string mcsv = slurp(dir / "measure.csv");
  CHECK(mcsv.find("# tau ") != std::string::npos);
  CHECK(slurp(dir / "equilibrium.json").find("tau_note") != std::string::npos);
}

TEST_CASE("stats subcommands accept an explicit measure file") {
  fs::path eq = scratch("eq-for-stats");
  CliResult e = run({"thermo", "equilibrium", "--preset", "doubling-plain", "--out", eq.string()});
  REQUIRE(e.code == 0);

  fs::path sdir = scratch("sample");
  CliResult s = run({"stats", "sample", "--preset", "doubling-plain", "--n", "5000", "--measure",
                     (eq / "measure.csv").string(), "--out", sdir.string()});
  CHECK(s.code == 0);
  REQUIRE(fs::exists(sdir / "samples.csv"));
  CHECK(slurp(sdir / "samples.csv").find("# provenance") != std::string::npos);

  CliResult mismatch = run({"stats", "sample", "--preset", "doubling-refined", "--measure",
                            (eq / "measure.csv").string(), "--out",
                            scratch("sample-bad").string()});
  CHECK(mismatch.code == 2);
  CHECK(mismatch.err.find("alphabet") != std::string::npos);
}

TEST_CASE("correlation and clt subcommands write tables and surface degeneracy") {
  fs::path cdir = scratch("corr");
  CliResult c = run({"stats", "correlations", "--preset", "doubling-plain", "--observable", "x",
                     "--n", "20000", "--lag-max", "6", "--out", cdir.string()});
  CHECK(c.code == 0);
  REQUIRE(fs::exists(cdir / "correlations.csv"));
  std::string csv = slurp(cdir / "correlations.csv");
  CHECK(csv.find("# theta=") != std::string::npos);
  CHECK(csv.find("# observables x,x") != std::string::npos);

  CliResult g = run({"stats", "clt", "--preset", "doubling-plain", "--block-len", "4096",
                     "--blocks", "64", "--out", scratch("clt").string()});
  CHECK(g.code == 0);

  CliResult d = run({"stats", "clt", "--preset", "doubling-plain", "--observable",
                     "coboundary-sin", "--block-len", "4096", "--blocks", "64", "--out",
                     scratch("clt-deg").string()});
  CHECK(d.code == 3);
  CHECK(d.err.find("DegenerateVariance") != std::string::npos);
}

TEST_CASE("pressure curve subcommand prints the grid summary") {
  fs::path dir = scratch("curve");
  CliResult r = run({"thermo", "pressure-curve", "--preset", "doubling-plain", "--out",
                     dir.string()});
  CHECK(r.code == 0);
  REQUIRE(fs::exists(dir / "pressure_curve.csv"));
  CHECK(r.out.find("monotone = yes") != std::string::npos);
  CHECK(r.out.find("convex = yes") != std::string::npos);
}

TEST_CASE("config files seed runs and flags override them") {
  fs::path dir = scratch("cfgfile");
  fs::create_directories(dir);
  fs::path file = dir / "run.cfg";
  {
    std::ofstream f(file);
    f << "# comment line\n";
    f << "preset=doubling-plain\n";
    f << "t=0.5\n";
    f << "seed=42\n";
  }
  fs::path out = dir / "out";
  CliResult r = run({"scheme", "build", "--config", file.string(), "--truncation", "8", "--out",
                     out.string()});
  CHECK(r.code == 0);
  RunConfig parsed = config_from_text(slurp(out / "config.txt"));
  CHECK(parsed.variant == "plain");
  CHECK(parsed.truncation == 8);
  CHECK(parsed.t == 0.5);
  CHECK(parsed.seed == 42);
  CHECK(parsed.out_dir == out.string());
}
