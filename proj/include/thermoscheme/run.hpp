#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "thermoscheme/common.hpp"
#include "thermoscheme/scheme.hpp"
#include "thermoscheme/shift.hpp"
#include "thermoscheme/thermo.hpp"

namespace thermoscheme {

// Flat configuration shared by every CLI subcommand.  Serializes to key=value
// lines; the canonical text (fixed key order, %.17g numbers) is what the
// config hash and the round-trip invariant are defined on.
struct RunConfig {
  std::string map_kind = "doubling";  // doubling | quadratic | tent
  double a = 1.999;                   // quadratic parameter
  double slope = 2.0;                 // tent slope
  std::string variant = "plain";      // plain | refined | first-return | unimodal
  int truncation = 29;
  double base_lo = 0.0;               // first-return inducing domain
  double base_hi = 0.5;

  std::string potential = "phi_t";  // phi_t | constant
  double t = 1.0;
  double c = 0.0;
  std::string t_grid = "-0.5,0,0.5,1,1.5";

  int depth = 1;         // cylinder depth for shift-side tables
  int audit_depth = 2;   // depth of the Gibbs constant audit
  int sample_depth = 12; // cylinder descent depth when sampling

  std::string observable = "x-centered";
  std::string observable2;  // second observable for correlations, defaults to the first
  long n = 100000;          // sample count
  int blocks = 1000;        // CLT block count
  long block_len = 16384;   // CLT block length
  int lag_max = 10;
  long orbit_len = 1000;
  int orbits = 100;

  double eps_h1 = 1e-9;
  double delta_crit = 1e-8;

  std::uint64_t seed = 20240817;
  std::string out_dir = "out";
  int threads = 1;
  bool force = false;
};

void apply_preset(RunConfig& cfg, const std::string& name);
std::string config_to_text(const RunConfig& cfg);
RunConfig config_from_text(const std::string& text);
std::string config_hash(const RunConfig& cfg);
void validate(const RunConfig& cfg);

InducingScheme build_scheme(const RunConfig& cfg);
PotentialSpec potential_of(const RunConfig& cfg);
std::vector<double> parse_grid(const std::string& csv);

// Inverse of cylinder_measure_to_csv, ignoring '#' comment lines.
CylinderMeasure measure_from_csv(const std::string& text);

// Full command dispatch; the thermoscheme binary is a thin wrapper around
// this so tests can drive the CLI in-process.  Returns the process exit code:
// 0 ok, 2 config error, 3 named numerical condition, 4 acceptance failure.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thermoscheme
