#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "thermoscheme/acceptance.hpp"
#include "thermoscheme/maps.hpp"
#include "thermoscheme/run.hpp"
#include "thermoscheme/stats.hpp"

namespace thermoscheme {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Cond::BadConfig, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const RunConfig& cfg, const std::string& name, const std::string& content,
                std::ostream& err) {
  fs::create_directories(cfg.out_dir);
  fs::path p = fs::path(cfg.out_dir) / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(Cond::BadConfig, "cannot write " + p.string());
  f << content;
  err << "wrote " << p.string() << "\n";
}

std::string csv_preamble(const RunConfig& cfg, const InducingScheme& s) {
  std::ostringstream o;
  o << "# config " << config_hash(cfg) << "\n";
  o << "# scheme " << s.variant << " truncation=" << s.truncation
    << " alphabet=" << s.alphabet() << " max_tau=" << s.max_tau() << "\n";
  o << "# tau " << s.tau_note << "\n";
  return o.str();
}

json meta_json(const RunConfig& cfg, const InducingScheme& s) {
  json m;
  m["config_hash"] = config_hash(cfg);
  m["scheme"] = {{"variant", s.variant},
                 {"truncation", s.truncation},
                 {"alphabet", s.alphabet()},
                 {"max_tau", s.max_tau()},
                 {"tau_note", s.tau_note}};
  return m;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_scheme_build(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  InducingScheme s = build_scheme(cfg);
  json j = json::parse(scheme_to_json(s));
  j["config"] = meta_json(cfg, s);
  write_file(cfg, "scheme.json", dump(j), err);
  out << "scheme " << s.variant << ": alphabet " << s.alphabet() << ", max tau " << s.max_tau()
      << ", total length " << fmt_g17(s.total_len()) << "\n";
  return 0;
}

int cmd_scheme_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  InducingScheme s = build_scheme(cfg);
  SchemeReport rep = verify_scheme(s, 3, derive_seed(cfg.seed, 0xC0DE));
  json j = meta_json(cfg, s);
  j["h1_pass"] = rep.h1_pass;
  j["h1_max_defect"] = rep.h1_max_defect;
  j["h2_pass"] = rep.h2_pass;
  j["h2_worst_ratio"] = rep.h2_worst_ratio;
  j["lambda1"] = rep.lambda1;
  j["c1"] = rep.c1;
  j["lambda1_resid"] = rep.lambda1_resid;
  j["tail_pass"] = rep.tail_pass;
  j["lambda2"] = rep.lambda2;
  j["c2"] = rep.c2;
  j["distortion_max"] = rep.distortion_max;
  j["distortion_pass"] = rep.distortion_pass;
  j["c3"] = rep.c3;
  j["c4"] = rep.c4;
  j["lambda3"] = rep.lambda3;
  j["gamma"] = rep.gamma;
  j["gamma_d"] = rep.gamma_d;
  json sc = json::object();
  for (const auto& [tau, cnt] : rep.S_counts) sc[std::to_string(tau)] = cnt;
  j["S_counts"] = sc;
  j["warnings"] = rep.warnings;
  write_file(cfg, "scheme_report.json", dump(j), err);
  for (const auto& w : rep.warnings) err << "warning: " << w << "\n";
  out << "lambda1 = " << fmt_g17(rep.lambda1) << ", lambda3 = " << fmt_g17(rep.lambda3)
      << ", gamma = " << fmt_g17(rep.gamma) << ", distortion max " << fmt_g17(rep.distortion_max)
      << "\n";
  if (rep.h1_max_defect >= cfg.eps_h1)
    fail(Cond::NotMarkov,
         "element image misses the inducing domain by " + fmt_g17(rep.h1_max_defect) +
             " (eps_h1 = " + fmt_g17(cfg.eps_h1) + ")",
         "(H1)");
  if (!rep.h2_pass)
    fail(Cond::NoConvergence, "sampled cylinders fail to contract", "(H2)");
  return 0;
}

int cmd_shift_pressure(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  InducingScheme s = build_scheme(cfg);
  InducedPotential pot = induce(s, potential_of(cfg));
  ShiftPotential sp = make_shift_potential(s, pot, cfg.depth);
  double P_op = gurevich_pressure_operator(sp, cfg.depth, cfg.threads);
  auto orbit = gurevich_pressure_orbits(sp, 16, 0, cfg.threads);
  json j = meta_json(cfg, s);
  j["operator"] = P_op;
  json rows = json::array();
  for (const auto& e : orbit) rows.push_back({{"n", e.n}, {"estimate", e.estimate}});
  j["orbit"] = rows;
  write_file(cfg, "pressure.json", dump(j), err);
  out << "P_G = " << fmt_g17(P_op) << " (orbit route at n=16: "
      << fmt_g17(orbit.empty() ? 0.0 : orbit.back().estimate) << ")\n";
  return 0;
}

int cmd_shift_gibbs(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  InducingScheme s = build_scheme(cfg);
  InducedPotential pot = induce(s, potential_of(cfg));
  ShiftPotential sp = make_shift_potential(s, pot, cfg.depth);
  CylinderMeasure m = gibbs_weights(sp, cfg.depth, cfg.threads);
  gibbs_constants(m, sp, cfg.audit_depth, derive_seed(cfg.seed, 0x91BB5));
  write_file(cfg, "gibbs.csv", csv_preamble(cfg, s) + cylinder_measure_to_csv(m), err);
  out << "P_G = " << fmt_g17(m.P_G) << ", C1 = " << fmt_g17(m.C1) << ", C2 = " << fmt_g17(m.C2)
      << ", leakage = " << fmt_g17(m.leakage) << "\n";
  return 0;
}

int cmd_thermo_curve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.potential != "phi_t")
    fail(Cond::BadConfig, "pressure-curve runs the phi_t family; set potential=phi_t");
  InducingScheme s = build_scheme(cfg);
  std::vector<double> grid = parse_grid(cfg.t_grid);
  PressureCurve pc = pressure_curve(s, grid, cfg.depth, cfg.threads);
  write_file(cfg, "pressure_curve.csv", csv_preamble(cfg, s) + pressure_curve_to_csv(pc), err);
  bool any_ok = false;
  for (const auto& smp : pc.samples) {
    if (smp.ok) {
      any_ok = true;
      out << "t = " << fmt_g17(smp.t) << ": P = " << fmt_g17(smp.P_t)
          << ", Q = " << fmt_g17(smp.Q_t) << "\n";
    } else {
      out << "t = " << fmt_g17(smp.t) << ": " << smp.err << "\n";
    }
  }
  out << "monotone = " << (pc.monotone ? "yes" : "no")
      << ", convex = " << (pc.convex ? "yes" : "no")
      << ", slope bounds = " << (pc.st_bounds_pass ? "pass" : "fail") << "\n";
  if (!any_ok && !grid.empty()) {
    RunConfig one = cfg;
    one.t = grid.front();
    equilibrium(s, potential_of(one), cfg.depth, cfg.force, cfg.threads);
  }
  return 0;
}

struct EquilibriumArtifacts {
  InducingScheme s;
  TowerMeasure mu;
  AbramovKac ak;
};

EquilibriumArtifacts make_equilibrium(const RunConfig& cfg) {
  EquilibriumArtifacts art{build_scheme(cfg), {}, {}};
  art.mu = equilibrium(art.s, potential_of(cfg), cfg.depth, cfg.force, cfg.threads);
  art.ak = verify_abramov_kac(art.mu, art.s, induce(art.s, potential_of(cfg)));
  return art;
}

json equilibrium_json(const RunConfig& cfg, const EquilibriumArtifacts& art) {
  json j = meta_json(cfg, art.s);
  j["Q"] = art.mu.Q;
  j["P_used"] = art.mu.P_used;
  j["P_G"] = art.mu.nu.P_G;
  j["C1"] = art.mu.nu.C1;
  j["C2"] = art.mu.nu.C2;
  j["leakage"] = art.mu.nu.leakage;
  j["p4_pass"] = art.mu.p4_pass;
  j["p4_K"] = art.mu.p4_K;
  j["p4_theta"] = art.mu.p4_theta;
  j["note"] = art.mu.note;
  j["abramov_kac"] = {{"h_F", art.ak.h_F},
                      {"Q", art.ak.Q},
                      {"entropy_available", art.ak.entropy_available},
                      {"h_f", art.ak.h_f},
                      {"entropy_residual", art.ak.entropy_residual},
                      {"phibar_int", art.ak.phibar_int},
                      {"phi_int", art.ak.phi_int},
                      {"kac_residual", art.ak.kac_residual}};
  return j;
}

int cmd_thermo_equilibrium(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  EquilibriumArtifacts art = make_equilibrium(cfg);
  write_file(cfg, "measure.csv", csv_preamble(cfg, art.s) + cylinder_measure_to_csv(art.mu.nu),
             err);
  write_file(cfg, "tower.csv", csv_preamble(cfg, art.s) + tower_to_csv(art.mu), err);
  write_file(cfg, "equilibrium.json", dump(equilibrium_json(cfg, art)), err);
  out << "Q = " << fmt_g17(art.mu.Q) << ", P = " << fmt_g17(art.mu.P_used)
      << ", h_F = " << fmt_g17(art.ak.h_F) << ", p4 theta = " << fmt_g17(art.mu.p4_theta)
      << "\n";
  return 0;
}

int cmd_thermo_liftability(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  InducingScheme s = build_scheme(cfg);
  LiftabilityReport rep = check_liftability(s);
  json j = meta_json(cfg, s);
  j["verdict"] = rep.verdict;
  j["Q_partial"] = rep.Q_partial;
  json rows = json::array();
  for (const auto& [tau, m] : rep.contributions) rows.push_back({{"tau", tau}, {"mass", m}});
  j["contributions"] = rows;
  j["note"] = rep.note;
  write_file(cfg, "liftability.json", dump(j), err);
  out << "verdict: " << rep.verdict << " (Q partial sum " << fmt_g17(rep.Q_partial) << ")\n";
  return 0;
}

int cmd_thermo_abramov_kac(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  EquilibriumArtifacts art = make_equilibrium(cfg);
  write_file(cfg, "abramov_kac.json", dump(equilibrium_json(cfg, art)), err);
  out << "h_F = " << fmt_g17(art.ak.h_F) << ", Q = " << fmt_g17(art.ak.Q)
      << ", kac residual = " << fmt_g17(art.ak.kac_residual);
  if (art.ak.entropy_available)
    out << ", entropy residual = " << fmt_g17(art.ak.entropy_residual);
  out << "\n";
  return 0;
}

TowerMeasure measure_for_stats(const RunConfig& cfg, const InducingScheme& s,
                               const std::string& measure_path) {
  if (!measure_path.empty()) {
    CylinderMeasure nu = measure_from_csv(read_file(measure_path));
    if (nu.alphabet != s.alphabet())
      fail(Cond::BadConfig, "measure file alphabet " + std::to_string(nu.alphabet) +
                                " does not match the scheme alphabet " +
                                std::to_string(s.alphabet()));
    return lift(nu, s);
  }
  return equilibrium(s, potential_of(cfg), cfg.depth, cfg.force, cfg.threads);
}

int cmd_stats_sample(const RunConfig& cfg, const std::string& measure_path, std::ostream& out,
                     std::ostream& err) {
  InducingScheme s = build_scheme(cfg);
  TowerMeasure mu = measure_for_stats(cfg, s, measure_path);
  SampleSet set = sample_lift(s, mu, cfg.n, cfg.seed, cfg.sample_depth, cfg.threads);
  std::string pre = csv_preamble(cfg, s) + "# provenance " + set.provenance + "\n";
  write_file(cfg, "samples.csv", pre + samples_to_csv(set), err);
  double mean = 0;
  for (double x : set.points) mean += x;
  mean /= set.points.empty() ? 1.0 : static_cast<double>(set.points.size());
  out << "n = " << set.points.size() << ", mean = " << fmt_g17(mean) << "\n";
  return 0;
}

int cmd_stats_lyapunov(const RunConfig& cfg, const std::string& measure_path, std::ostream& out,
                       std::ostream& err) {
  InducingScheme s = build_scheme(cfg);
  TowerMeasure mu = measure_for_stats(cfg, s, measure_path);
  LyapunovReport rep = lyapunov(s, mu, cfg.orbit_len, cfg.orbits, cfg.seed, cfg.delta_crit,
                                cfg.threads);
  json j = meta_json(cfg, s);
  j["value"] = rep.value;
  j["se"] = rep.se;
  j["steps"] = rep.steps;
  j["skipped"] = rep.skipped;
  j["bracket_lo"] = rep.bracket_lo;
  j["bracket_hi"] = rep.bracket_hi;
  j["bracket_pass"] = rep.bracket_pass;
  write_file(cfg, "lyapunov.json", dump(j), err);
  out << "lyapunov = " << fmt_g17(rep.value) << " +- " << fmt_g17(rep.se) << " (bracket ["
      << fmt_g17(rep.bracket_lo) << ", " << fmt_g17(rep.bracket_hi) << "])\n";
  if (rep.bracket_known && !rep.bracket_pass)
    fail(Cond::NoBracket, "estimate " + fmt_g17(rep.value) +
                              " falls outside the derivative bracket [" +
                              fmt_g17(rep.bracket_lo) + ", " + fmt_g17(rep.bracket_hi) + "]");
  return 0;
}

int cmd_stats_correlations(const RunConfig& cfg, const std::string& measure_path,
                           std::ostream& out, std::ostream& err) {
  InducingScheme s = build_scheme(cfg);
  TowerMeasure mu = measure_for_stats(cfg, s, measure_path);
  Observable h1 = make_observable(cfg.observable);
  Observable h2 = cfg.observable2.empty() ? h1 : make_observable(cfg.observable2);
  CorrelationFit fit = correlation_fit(s, mu, h1, h2, cfg.lag_max, cfg.n, cfg.seed, cfg.threads);
  std::ostringstream tailer;
  tailer << "# observables " << h1.id << "," << h2.id << "\n";
  tailer << "# theta=" << fmt_g17(fit.theta) << " K=" << fmt_g17(fit.K)
         << " fit_lags=" << fit.fit_lags << " all_noise=" << (fit.all_noise ? 1 : 0) << "\n";
  write_file(cfg, "correlations.csv",
             csv_preamble(cfg, s) + correlation_to_csv(fit) + tailer.str(), err);
  if (fit.all_noise)
    out << "all lags within noise: consistent with exponential decay\n";
  else
    out << "theta = " << fmt_g17(fit.theta) << " over " << fit.fit_lags << " lags, K = "
        << fmt_g17(fit.K) << "\n";
  return 0;
}

int cmd_stats_clt(const RunConfig& cfg, const std::string& measure_path, std::ostream& out,
                  std::ostream& err) {
  InducingScheme s = build_scheme(cfg);
  TowerMeasure mu = measure_for_stats(cfg, s, measure_path);
  Observable h = make_observable(cfg.observable);
  CLTReport rep = clt_test(s, mu, h, cfg.block_len, cfg.blocks, cfg.seed, cfg.threads);
  json j = meta_json(cfg, s);
  j["observable"] = h.id;
  json body = json::parse(clt_to_json(rep));
  for (auto& [k, v] : body.items()) j[k] = v;
  write_file(cfg, "clt.json", dump(j), err);
  out << "gamma = " << fmt_g17(rep.gamma) << ", KS = " << fmt_g17(rep.ks) << " over " << rep.m
      << " blocks of " << rep.n << "\n";
  return 0;
}

int cmd_verify_all(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::string scratch = (fs::path(cfg.out_dir) / "acceptance_scratch").string();
  std::vector<AcceptanceResult> res = run_acceptance(scratch, cfg.threads);
  std::string table = acceptance_table(res);
  out << table;
  fs::create_directories(cfg.out_dir);
  std::ofstream f(fs::path(cfg.out_dir) / "acceptance.txt", std::ios::binary);
  f << table;
  err << "wrote " << (fs::path(cfg.out_dir) / "acceptance.txt").string() << "\n";
  for (const auto& r : res)
    if (!r.pass) return 4;
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"thermodynamic formalism for interval maps with inducing schemes"};
  app.require_subcommand(1);

  std::string config_path, preset, measure_path;
  RunConfig flag;  // holders for explicitly given flags
  auto* o_config = app.add_option("--config", config_path, "flat key=value config file");
  auto* o_preset = app.add_option("--preset", preset,
                                  "doubling-plain | doubling-refined | unimodal-a2eps | "
                                  "first-return-doubling");
  auto* o_out = app.add_option("--out", flag.out_dir, "output directory");
  auto* o_seed = app.add_option("--seed", flag.seed, "master seed; all randomness flows from it");
  auto* o_threads = app.add_option("--threads", flag.threads, "worker cap; results do not depend on it");
  auto* o_force = app.add_flag("--force", flag.force, "proceed past admissibility refusals");
  auto* o_map = app.add_option("--map", flag.map_kind, "doubling | quadratic | tent");
  auto* o_a = app.add_option("--a", flag.a, "quadratic parameter");
  auto* o_slope = app.add_option("--slope", flag.slope, "tent slope");
  auto* o_variant = app.add_option("--variant", flag.variant,
                                   "plain | refined | first-return | unimodal");
  auto* o_trunc = app.add_option("--truncation", flag.truncation, "scheme truncation (>= 4)");
  auto* o_blo = app.add_option("--base-lo", flag.base_lo, "first-return base, lower end");
  auto* o_bhi = app.add_option("--base-hi", flag.base_hi, "first-return base, upper end");
  auto* o_pot = app.add_option("--potential", flag.potential, "phi_t | constant");
  auto* o_t = app.add_option("--t", flag.t, "phi_t parameter");
  auto* o_c = app.add_option("--c", flag.c, "constant potential value");
  auto* o_grid = app.add_option("--t-grid", flag.t_grid, "comma separated t values");
  auto* o_depth = app.add_option("--depth", flag.depth, "cylinder depth");
  auto* o_adepth = app.add_option("--audit-depth", flag.audit_depth, "Gibbs audit depth");
  auto* o_sdepth = app.add_option("--sample-depth", flag.sample_depth, "cylinder descent depth");
  auto* o_obs = app.add_option("--observable", flag.observable, "observable name");
  auto* o_obs2 = app.add_option("--observable2", flag.observable2, "second observable");
  auto* o_n = app.add_option("--n", flag.n, "sample count");
  auto* o_blocks = app.add_option("--blocks", flag.blocks, "CLT block count");
  auto* o_blen = app.add_option("--block-len", flag.block_len, "CLT block length");
  auto* o_lag = app.add_option("--lag-max", flag.lag_max, "largest correlation lag");
  auto* o_olen = app.add_option("--orbit-len", flag.orbit_len, "Birkhoff orbit length");
  auto* o_orb = app.add_option("--orbits", flag.orbits, "orbit count");
  auto* o_eh1 = app.add_option("--eps-h1", flag.eps_h1, "endpoint tolerance for (H1)");
  auto* o_dcrit = app.add_option("--delta-crit", flag.delta_crit, "critical neighborhood radius");
  auto* o_measure = app.add_option("--measure", measure_path, "measure csv produced by thermo equilibrium");

  CLI::App* c_scheme = app.add_subcommand("scheme", "build and check inducing schemes");
  CLI::App* c_scheme_build = c_scheme->add_subcommand("build", "construct and serialize");
  CLI::App* c_scheme_verify = c_scheme->add_subcommand("verify", "run the (H1)-(H6) report");
  CLI::App* c_shift = app.add_subcommand("shift", "symbolic pressure and Gibbs tables");
  CLI::App* c_shift_pressure = c_shift->add_subcommand("pressure", "Gurevich pressure");
  CLI::App* c_shift_gibbs = c_shift->add_subcommand("gibbs", "Gibbs cylinder weights");
  CLI::App* c_thermo = app.add_subcommand("thermo", "pressure roots and equilibrium measures");
  CLI::App* c_thermo_curve = c_thermo->add_subcommand("pressure-curve", "P(t) over a t grid");
  CLI::App* c_thermo_eq = c_thermo->add_subcommand("equilibrium", "equilibrium measure + lift");
  CLI::App* c_thermo_lift = c_thermo->add_subcommand("liftability", "Q partial-sum verdict");
  CLI::App* c_thermo_ak = c_thermo->add_subcommand("abramov-kac", "entropy and integral identities");
  CLI::App* c_stats = app.add_subcommand("stats", "sampling and limit-theorem checks");
  CLI::App* c_stats_sample = c_stats->add_subcommand("sample", "draw lifted-measure samples");
  CLI::App* c_stats_lyap = c_stats->add_subcommand("lyapunov", "Birkhoff derivative average");
  CLI::App* c_stats_corr = c_stats->add_subcommand("correlations", "correlation decay fit");
  CLI::App* c_stats_clt = c_stats->add_subcommand("clt", "block-sum normality check");
  CLI::App* c_verify = app.add_subcommand("verify-all", "run the full verification suite");
  for (CLI::App* sub : {c_scheme, c_shift, c_thermo, c_stats}) {
    sub->require_subcommand(1);
    sub->fallthrough();
  }
  for (CLI::App* sub : {c_scheme_build, c_scheme_verify, c_shift_pressure, c_shift_gibbs,
                        c_thermo_curve, c_thermo_eq, c_thermo_lift, c_thermo_ak, c_stats_sample,
                        c_stats_lyap, c_stats_corr, c_stats_clt, c_verify})
    sub->fallthrough();

  std::vector<const char*> argv;
  argv.push_back("thermoscheme");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    RunConfig cfg;
    if (o_config->count()) cfg = config_from_text(read_file(config_path));
    if (o_preset->count()) apply_preset(cfg, preset);
    if (o_out->count()) cfg.out_dir = flag.out_dir;
    if (o_seed->count()) cfg.seed = flag.seed;
    if (o_threads->count()) cfg.threads = flag.threads;
    if (o_force->count()) cfg.force = flag.force;
    if (o_map->count()) cfg.map_kind = flag.map_kind;
    if (o_a->count()) cfg.a = flag.a;
    if (o_slope->count()) cfg.slope = flag.slope;
    if (o_variant->count()) cfg.variant = flag.variant;
    if (o_trunc->count()) cfg.truncation = flag.truncation;
    if (o_blo->count()) cfg.base_lo = flag.base_lo;
    if (o_bhi->count()) cfg.base_hi = flag.base_hi;
    if (o_pot->count()) cfg.potential = flag.potential;
    if (o_t->count()) cfg.t = flag.t;
    if (o_c->count()) cfg.c = flag.c;
    if (o_grid->count()) cfg.t_grid = flag.t_grid;
    if (o_depth->count()) cfg.depth = flag.depth;
    if (o_adepth->count()) cfg.audit_depth = flag.audit_depth;
    if (o_sdepth->count()) cfg.sample_depth = flag.sample_depth;
    if (o_obs->count()) cfg.observable = flag.observable;
    if (o_obs2->count()) cfg.observable2 = flag.observable2;
    if (o_n->count()) cfg.n = flag.n;
    if (o_blocks->count()) cfg.blocks = flag.blocks;
    if (o_blen->count()) cfg.block_len = flag.block_len;
    if (o_lag->count()) cfg.lag_max = flag.lag_max;
    if (o_olen->count()) cfg.orbit_len = flag.orbit_len;
    if (o_orb->count()) cfg.orbits = flag.orbits;
    if (o_eh1->count()) cfg.eps_h1 = flag.eps_h1;
    if (o_dcrit->count()) cfg.delta_crit = flag.delta_crit;
    validate(cfg);
    write_file(cfg, "config.txt", config_to_text(cfg), err);

    if (c_scheme_build->parsed()) return cmd_scheme_build(cfg, out, err);
    if (c_scheme_verify->parsed()) return cmd_scheme_verify(cfg, out, err);
    if (c_shift_pressure->parsed()) return cmd_shift_pressure(cfg, out, err);
    if (c_shift_gibbs->parsed()) return cmd_shift_gibbs(cfg, out, err);
    if (c_thermo_curve->parsed()) return cmd_thermo_curve(cfg, out, err);
    if (c_thermo_eq->parsed()) return cmd_thermo_equilibrium(cfg, out, err);
    if (c_thermo_lift->parsed()) return cmd_thermo_liftability(cfg, out, err);
    if (c_thermo_ak->parsed()) return cmd_thermo_abramov_kac(cfg, out, err);
    if (c_stats_sample->parsed()) return cmd_stats_sample(cfg, measure_path, out, err);
    if (c_stats_lyap->parsed()) return cmd_stats_lyapunov(cfg, measure_path, out, err);
    if (c_stats_corr->parsed()) return cmd_stats_correlations(cfg, measure_path, out, err);
    if (c_stats_clt->parsed()) return cmd_stats_clt(cfg, measure_path, out, err);
    if (c_verify->parsed()) return cmd_verify_all(cfg, out, err);
    err << "no subcommand selected\n";
    return 2;
  } catch (const Error& e) {
    err << e.what() << "\n";
    if (e.cond() == Cond::BadConfig && e.hypothesis().empty()) return 2;
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace thermoscheme
