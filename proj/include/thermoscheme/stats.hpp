#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "thermoscheme/common.hpp"
#include "thermoscheme/maps.hpp"
#include "thermoscheme/scheme.hpp"
#include "thermoscheme/thermo.hpp"

namespace thermoscheme {

struct SampleSet {
  std::vector<double> points;
  std::uint64_t seed = 0;
  int descent_depth = 0;
  std::string provenance;
};

// Draws n points of the lifted measure: element with probability tau*nu/Q,
// a point inside it by cylinder descent to `depth` symbols, then a uniform
// level k and the image f^k.  Deterministic given the seed, worker-independent.
SampleSet sample_lift(const InducingScheme& s, const TowerMeasure& mu, long n,
                      std::uint64_t seed, int depth = 12, int threads = 1);

struct LyapunovReport {
  double value = 0;
  double se = 0;
  long steps = 0;
  long skipped = 0;  // near-critical steps left out of the average
  double bracket_lo = 0;
  double bracket_hi = 0;
  bool bracket_pass = false;
  bool bracket_known = false;
};

LyapunovReport lyapunov(const InducingScheme& s, const TowerMeasure& mu, long orbit_len,
                        int n_orbits, std::uint64_t seed, double delta_crit = 1e-8,
                        int threads = 1);

// Birkhoff average of log|df| along one orbit, skipping (and counting) steps
// inside the delta_crit neighborhood of a critical point.
double lyapunov_orbit(const IntervalMap& map, double x0, long n, double delta_crit = 1e-8,
                      long* skipped = nullptr);

struct Observable {
  std::string id;
  std::function<double(double)> f;
};

// Named observables for the CLI and tests: x, x-centered, cos2pi, sin2pi,
// coboundary-sin (a doubling-map coboundary in closed form), constant.
Observable make_observable(const std::string& name);

struct CorrelationFit {
  std::vector<int> lags;
  std::vector<double> corr;
  std::vector<double> se;
  double K = 0;
  double theta = 0;
  double fit_resid = 0;
  int fit_lags = 0;
  bool all_noise = false;  // no lag beyond 3 standard errors: consistent with fast decay
  bool pass = false;
  double mean1 = 0, mean2 = 0;
};

// Monte-Carlo correlations C(k) = E[h1(f^k x) h2(x)] - E h1 E h2 from i.i.d.
// starts, with an exponential fit over the lags that clear the noise floor.
CorrelationFit correlation_fit(const InducingScheme& s, const TowerMeasure& mu,
                               const Observable& h1, const Observable& h2, int lag_max, long n,
                               std::uint64_t seed, int threads = 1);

struct CLTReport {
  long n = 0;
  int m = 0;
  double gamma = 0;
  double ks = 0;
  double gamma_coarse = 0;  // same estimate at block length n/16
  double scale_ratio = 0;   // gamma / gamma_coarse; ~1 for CLT scaling, ~1/4 for coboundaries
  double mean = 0;
};

// Block-sum central limit check: m stationary blocks of length n, gamma from
// the spread of normalized sums, Kolmogorov-Smirnov distance to N(0, gamma^2).
CLTReport clt_test(const InducingScheme& s, const TowerMeasure& mu, const Observable& h, long n,
                   int m, std::uint64_t seed, int threads = 1);

std::string samples_to_csv(const SampleSet& set);
std::string correlation_to_csv(const CorrelationFit& fit);
std::string clt_to_json(const CLTReport& rep);

}  // namespace thermoscheme
