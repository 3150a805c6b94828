#include "thermoscheme/run.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "thermoscheme/maps.hpp"

namespace thermoscheme {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    fail(Cond::BadConfig, "key " + key + " expects a number, got '" + v + "'");
  return x;
}

long parse_long(const std::string& key, const std::string& v) {
  char* end = nullptr;
  long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    fail(Cond::BadConfig, "key " + key + " expects an integer, got '" + v + "'");
  return x;
}

}  // namespace

void apply_preset(RunConfig& cfg, const std::string& name) {
  if (name == "doubling-plain") {
    cfg.map_kind = "doubling";
    cfg.variant = "plain";
    cfg.truncation = 29;
  } else if (name == "doubling-refined") {
    cfg.map_kind = "doubling";
    cfg.variant = "refined";
    cfg.truncation = 5;
  } else if (name == "unimodal-a2eps") {
    cfg.map_kind = "quadratic";
    cfg.a = 1.999;
    cfg.variant = "unimodal";
    cfg.truncation = 12;
  } else if (name == "first-return-doubling") {
    cfg.map_kind = "doubling";
    cfg.variant = "first-return";
    cfg.truncation = 4;
    cfg.base_lo = 0.0;
    cfg.base_hi = 0.5;
  } else {
    fail(Cond::BadConfig, "unknown preset '" + name +
                              "'; available: doubling-plain, doubling-refined, unimodal-a2eps, "
                              "first-return-doubling");
  }
}

std::string config_to_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "map=" << cfg.map_kind << "\n";
  out << "a=" << fmt_g17(cfg.a) << "\n";
  out << "slope=" << fmt_g17(cfg.slope) << "\n";
  out << "variant=" << cfg.variant << "\n";
  out << "truncation=" << cfg.truncation << "\n";
  out << "base_lo=" << fmt_g17(cfg.base_lo) << "\n";
  out << "base_hi=" << fmt_g17(cfg.base_hi) << "\n";
  out << "potential=" << cfg.potential << "\n";
  out << "t=" << fmt_g17(cfg.t) << "\n";
  out << "c=" << fmt_g17(cfg.c) << "\n";
  out << "t_grid=" << cfg.t_grid << "\n";
  out << "depth=" << cfg.depth << "\n";
  out << "audit_depth=" << cfg.audit_depth << "\n";
  out << "sample_depth=" << cfg.sample_depth << "\n";
  out << "observable=" << cfg.observable << "\n";
  out << "observable2=" << cfg.observable2 << "\n";
  out << "n=" << cfg.n << "\n";
  out << "blocks=" << cfg.blocks << "\n";
  out << "block_len=" << cfg.block_len << "\n";
  out << "lag_max=" << cfg.lag_max << "\n";
  out << "orbit_len=" << cfg.orbit_len << "\n";
  out << "orbits=" << cfg.orbits << "\n";
  out << "eps_h1=" << fmt_g17(cfg.eps_h1) << "\n";
  out << "delta_crit=" << fmt_g17(cfg.delta_crit) << "\n";
  out << "seed=" << cfg.seed << "\n";
  out << "out=" << cfg.out_dir << "\n";
  out << "force=" << (cfg.force ? 1 : 0) << "\n";
  // threads stays out: it caps workers without changing any result, so it
  // must not perturb the config hash embedded in outputs
  return out.str();
}

RunConfig config_from_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  // a preset line seeds the defaults before any explicit key lands on top
  std::istringstream scan(text);
  while (std::getline(scan, line)) {
    std::string s = trim(line);
    if (s.rfind("preset=", 0) == 0) apply_preset(cfg, trim(s.substr(7)));
  }
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      fail(Cond::BadConfig, "config line " + std::to_string(lineno) + " is not key=value: " + s);
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key == "preset") continue;
    else if (key == "map") cfg.map_kind = val;
    else if (key == "a") cfg.a = parse_double(key, val);
    else if (key == "slope") cfg.slope = parse_double(key, val);
    else if (key == "variant") cfg.variant = val;
    else if (key == "truncation") cfg.truncation = static_cast<int>(parse_long(key, val));
    else if (key == "base_lo") cfg.base_lo = parse_double(key, val);
    else if (key == "base_hi") cfg.base_hi = parse_double(key, val);
    else if (key == "potential") cfg.potential = val;
    else if (key == "t") cfg.t = parse_double(key, val);
    else if (key == "c") cfg.c = parse_double(key, val);
    else if (key == "t_grid") cfg.t_grid = val;
    else if (key == "depth") cfg.depth = static_cast<int>(parse_long(key, val));
    else if (key == "audit_depth") cfg.audit_depth = static_cast<int>(parse_long(key, val));
    else if (key == "sample_depth") cfg.sample_depth = static_cast<int>(parse_long(key, val));
    else if (key == "observable") cfg.observable = val;
    else if (key == "observable2") cfg.observable2 = val;
    else if (key == "n") cfg.n = parse_long(key, val);
    else if (key == "blocks") cfg.blocks = static_cast<int>(parse_long(key, val));
    else if (key == "block_len") cfg.block_len = parse_long(key, val);
    else if (key == "lag_max") cfg.lag_max = static_cast<int>(parse_long(key, val));
    else if (key == "orbit_len") cfg.orbit_len = parse_long(key, val);
    else if (key == "orbits") cfg.orbits = static_cast<int>(parse_long(key, val));
    else if (key == "eps_h1") cfg.eps_h1 = parse_double(key, val);
    else if (key == "delta_crit") cfg.delta_crit = parse_double(key, val);
    else if (key == "seed") {
      char* end = nullptr;
      cfg.seed = std::strtoull(val.c_str(), &end, 10);
      if (end == val.c_str() || *end != '\0')
        fail(Cond::BadConfig, "key seed expects an unsigned integer, got '" + val + "'");
    }
    else if (key == "out") cfg.out_dir = val;
    else if (key == "threads") cfg.threads = static_cast<int>(parse_long(key, val));
    else if (key == "force") cfg.force = parse_long(key, val) != 0;
    else fail(Cond::BadConfig, "unknown config key '" + key + "'");
  }
  return cfg;
}

std::string config_hash(const RunConfig& cfg) {
  std::string text = config_to_text(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void validate(const RunConfig& cfg) {
  auto oneof = [](const std::string& v, std::initializer_list<const char*> allowed,
                  const std::string& what) {
    for (const char* a : allowed)
      if (v == a) return;
    fail(Cond::BadConfig, what + " '" + v + "' is not recognized");
  };
  oneof(cfg.map_kind, {"doubling", "quadratic", "tent"}, "map");
  oneof(cfg.variant, {"plain", "refined", "first-return", "unimodal"}, "variant");
  oneof(cfg.potential, {"phi_t", "constant"}, "potential");
  if (cfg.truncation < 4) fail(Cond::BadConfig, "truncation must be >= 4");
  if (!(cfg.eps_h1 > 0)) fail(Cond::BadConfig, "eps_h1 must be positive");
  if (!(cfg.delta_crit > 0)) fail(Cond::BadConfig, "delta_crit must be positive");
  if (cfg.depth < 1 || cfg.audit_depth < 1 || cfg.sample_depth < 1)
    fail(Cond::BadConfig, "depths must be >= 1");
  if (cfg.threads < 1) fail(Cond::BadConfig, "threads must be >= 1");
  if (cfg.n < 1 || cfg.blocks < 1 || cfg.block_len < 1 || cfg.lag_max < 1 ||
      cfg.orbit_len < 1 || cfg.orbits < 1)
    fail(Cond::BadConfig, "sample sizes must be positive");
  if (cfg.variant == "first-return" && !(cfg.base_lo < cfg.base_hi))
    fail(Cond::BadConfig, "first-return base interval is empty");
  if (cfg.variant == "unimodal" && cfg.map_kind != "quadratic")
    fail(Cond::BadConfig, "unimodal schemes need map=quadratic");
  if ((cfg.variant == "plain" || cfg.variant == "refined") && cfg.map_kind != "doubling")
    fail(Cond::BadConfig, "dyadic schemes need map=doubling");
}

InducingScheme build_scheme(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.variant == "plain" || cfg.variant == "refined")
    return build_doubling_scheme(cfg.variant, cfg.truncation);
  if (cfg.variant == "unimodal") return build_unimodal_scheme(make_quadratic(cfg.a), cfg.truncation);
  std::shared_ptr<const IntervalMap> map;
  if (cfg.map_kind == "doubling") map = make_doubling();
  else if (cfg.map_kind == "tent") map = make_tent(cfg.slope);
  else fail(Cond::BadConfig, "first-return schemes need map=doubling or map=tent");
  return build_first_return_scheme(map, Interval{cfg.base_lo, cfg.base_hi}, cfg.truncation);
}

PotentialSpec potential_of(const RunConfig& cfg) {
  PotentialSpec spec;
  spec.tag = cfg.potential;
  spec.t = cfg.t;
  spec.c = cfg.c;
  return spec;
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> grid;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::string v = trim(item);
    if (v.empty()) continue;
    grid.push_back(parse_double("t_grid", v));
  }
  if (grid.empty()) fail(Cond::BadConfig, "t_grid is empty");
  return grid;
}

CylinderMeasure measure_from_csv(const std::string& text) {
  CylinderMeasure m;
  std::istringstream in(text);
  std::string line;
  int stage = 0;  // 0: await stats header, 1: stats row, 2: await table header, 3: rows
  while (std::getline(in, line)) {
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (stage == 0) {
      if (s != "P_G,C1,C2,leakage") fail(Cond::BadConfig, "measure csv missing its stats header");
      stage = 1;
    } else if (stage == 1) {
      std::istringstream row(s);
      std::string f;
      std::vector<double> vals;
      while (std::getline(row, f, ',')) vals.push_back(parse_double("measure", f));
      if (vals.size() != 4) fail(Cond::BadConfig, "measure csv stats row malformed");
      m.P_G = vals[0];
      m.C1 = vals[1];
      m.C2 = vals[2];
      m.leakage = vals[3];
      stage = 2;
    } else if (stage == 2) {
      if (s != "word,weight") fail(Cond::BadConfig, "measure csv missing the word,weight header");
      stage = 3;
    } else {
      std::size_t comma = s.rfind(',');
      if (comma == std::string::npos) fail(Cond::BadConfig, "measure csv row malformed: " + s);
      std::string word = s.substr(0, comma);
      double w = parse_double("weight", s.substr(comma + 1));
      std::vector<int> syms;
      std::istringstream ws(word);
      std::string part;
      while (std::getline(ws, part, '-'))
        syms.push_back(static_cast<int>(parse_long("symbol", part)));
      if (syms.empty()) fail(Cond::BadConfig, "measure csv row has an empty word");
      m.weights.push_back({syms, w});
    }
  }
  if (m.weights.empty()) fail(Cond::BadConfig, "measure csv has no weight rows");
  m.depth = static_cast<int>(m.weights.front().first.size());
  int max_sym = 0;
  for (const auto& [w, v] : m.weights)
    for (int sym : w) max_sym = std::max(max_sym, sym);
  m.alphabet = max_sym + 1;
  return m;
}

}  // namespace thermoscheme
