#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "thermoscheme/common.hpp"
#include "thermoscheme/scheme.hpp"
#include "thermoscheme/shift.hpp"

namespace thermoscheme {

// Base potential on the interval.  phi_t is the geometric family -t*log|df|,
// constant is phi == c, custom carries an arbitrary evaluator.
struct PotentialSpec {
  std::string tag = "phi_t";  // phi_t | constant | custom
  double t = 1.0;
  double c = 0.0;
  std::function<double(double)> custom;
};

// Induced potential phibar(x) = sum_{k<tau} phi(f^k x) on the scheme, with
// per-element value at the coded fixed point and sup/inf bounds, plus one
// value per class so that unmaterialized levels still enter the sums.
struct InducedPotential {
  const InducingScheme* scheme = nullptr;
  PotentialSpec base;
  std::vector<double> value;  // phibar at the element's periodic point
  std::vector<double> sup;
  std::vector<double> inf;
  std::vector<double> class_value;  // one per scheme.classes entry
  bool class_values_ok = true;

  double eval(double x) const;  // orbit sum at an arbitrary point of W
};

InducedPotential induce(const InducingScheme& s, const PotentialSpec& base);

// Shift-side view of phibar - shift_c * tau on the truncated alphabet.
// tail_weight collects exp(phi) over unmaterialized classes.
ShiftPotential make_shift_potential(const InducingScheme& s, const InducedPotential& pot,
                                    int depth, double shift_c = 0.0);

// Gurevich pressure of phibar - c*tau at the current truncation.  depth 1 uses
// an exact log-sum-exp over elements and class tails; higher depth goes
// through the operator route on the materialized alphabet.
double induced_shift_pressure(const InducingScheme& s, const InducedPotential& pot, double c,
                              int depth = 1, int threads = 1);

struct VariationFit {
  bool pass = false;
  double A = 0;
  double r = 0;
  double resid = 0;
};

struct PotentialReport {
  VariationFit p1;
  bool p2_pass = false;
  double p2_sum = 0;
  double p2_tail_ratio = 0;
  std::vector<std::pair<int, double>> p2_contributions;  // per distinct tau
  bool p3_pass = false;
  double p3_eps0 = 0;
  bool p4_pass = true;  // deferred until a measure exists
  double p4_K = 0;
  double p4_theta = 0;
  std::vector<std::string> notes;

  bool admissible() const { return p1.pass && p2_pass && p3_pass; }
};

PotentialReport check_P(const InducingScheme& s, const InducedPotential& pot,
                        const std::vector<double>& eps_grid = {});

struct PLReport {
  double value = 0;
  double residual = 0;     // |P_G(phibar - value*tau)|
  double bracket_lo = 0;   // scan endpoints sandwiching the root
  double bracket_hi = 0;
  int iterations = 0;
};

PLReport compute_PL(const InducingScheme& s, const InducedPotential& pot, int depth = 1,
                    int threads = 1);

// Measure on the tower: induced cylinder measure nu, mean return time Q, and
// one mass entry per (element, level) slice.
struct TowerMeasure {
  CylinderMeasure nu;
  double Q = 0;
  std::vector<std::pair<std::pair<int, int>, double>> levels;  // ((symbol, k), mass)
  double P_used = 0;  // pressure constant subtracted during normalization
  bool p4_pass = false;
  double p4_K = 0;
  double p4_theta = 0;
  std::string note;
};

double Q_of(const CylinderMeasure& nu, const InducingScheme& s);

TowerMeasure lift(const CylinderMeasure& nu, const InducingScheme& s);

// Equilibrium state for the base potential: normalizes phibar by P_L*tau,
// takes Gibbs weights, lifts.  Refuses inadmissible potentials and phi_t
// outside the certified t range unless force is set.
TowerMeasure equilibrium(const InducingScheme& s, const PotentialSpec& base, int depth = 1,
                         bool force = false, int threads = 1);

struct AbramovKac {
  double h_F = 0;          // entropy of nu under the induced map
  double h_step = 0;       // depth-raise increment of the entropy estimate
  double Q = 0;
  bool entropy_available = false;
  double h_f = 0;          // known base entropy when available
  double entropy_residual = 0;  // |h_F - Q*h_f|
  double phibar_int = 0;   // integral of phibar d nu
  double phi_int = 0;      // integral of phi d(lifted measure), slice quadrature
  double kac_residual = 0; // |phibar_int - Q*phi_int|
};

AbramovKac verify_abramov_kac(const TowerMeasure& mu, const InducingScheme& s,
                              const InducedPotential& pot);

struct CurveSample {
  double t = 0;
  double P_t = 0;
  double Q_t = 0;
  double C1 = 1;
  double C2 = 1;
  double leakage = 0;
  double p4_theta = 0;
  bool ok = false;
  std::string err;
};

struct PressureCurve {
  std::vector<CurveSample> samples;
  bool monotone = false;
  bool convex = false;
  bool st_bounds_pass = false;
  double lambda1 = 0;
  double lambda3 = 0;
};

PressureCurve pressure_curve(const InducingScheme& s, const std::vector<double>& t_grid,
                             int depth = 1, int threads = 1);

std::string pressure_curve_to_csv(const PressureCurve& curve);
std::string tower_to_csv(const TowerMeasure& mu);

struct TBounds {
  double t0 = 0;
  double t1 = 0;
  bool degenerate = false;  // lambda1 == lambda3 certifies every t
};

TBounds t_bounds(double lambda1, double lambda3, double gamma);

struct LiftabilityReport {
  std::string verdict;  // liftable | not-liftable | inconclusive
  double Q_partial = 0;
  std::vector<std::pair<int, double>> contributions;  // per distinct tau, normalized mass
  std::string note;
};

// Tau-ordered partial sums of sum tau * mass for the given per-element masses
// (defaults to length density; class levels enter through their totals).
LiftabilityReport check_liftability(const InducingScheme& s,
                                    const std::vector<double>& masses = {});

}  // namespace thermoscheme
