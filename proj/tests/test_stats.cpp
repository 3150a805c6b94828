#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"
#include "thermoscheme/maps.hpp"
#include "thermoscheme/scheme.hpp"
#include "thermoscheme/shift.hpp"
#include "thermoscheme/stats.hpp"
#include "thermoscheme/thermo.hpp"

using namespace thermoscheme;

namespace {

const double kLog2 = std::log(2.0);

PotentialSpec geometric(double t) {
  PotentialSpec spec;
  spec.tag = "phi_t";
  spec.t = t;
  return spec;
}

CylinderMeasure depth1_measure(const InducingScheme& s, const std::vector<double>& w) {
  CylinderMeasure m;
  m.depth = 1;
  m.alphabet = s.alphabet();
  for (std::size_t j = 0; j < w.size(); ++j)
    m.weights.push_back({{static_cast<int>(j)}, w[j]});
  return m;
}

// The lifted t=1 equilibrium on the handed dyadic scheme is Lebesgue measure.
TowerMeasure lebesgue_tower(const InducingScheme& s) { return equilibrium(s, geometric(1.0)); }

}  // namespace

TEST_CASE("lift samples reproduce lebesgue statistics") {
  InducingScheme s = build_doubling_scheme("plain", 29);
  TowerMeasure mu = lebesgue_tower(s);

  SampleSet set = sample_lift(s, mu, 100000, 20240811);
  REQUIRE(set.points.size() == 100000);
  double mean = 0, upper = 0;
  for (double x : set.points) {
    REQUIRE(x > 0.0);
    REQUIRE(x <= 1.0);
    mean += x;
    if (x > 0.5) upper += 1;
  }
  mean /= set.points.size();
  upper /= set.points.size();
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::fabs(mean - 0.5) < 0.005);
  CHECK(std::fabs(upper - 0.5) < 0.005);

  SampleSet again = sample_lift(s, mu, 100000, 20240811, 12, 4);
  REQUIRE(again.points.size() == set.points.size());
  for (std::size_t i = 0; i < set.points.size(); ++i) CHECK(again.points[i] == set.points[i]);

  std::string csv = samples_to_csv(set);
  CHECK(csv.substr(0, 2) == "x\n");
}

TEST_CASE("point mass lift collapses to the coded representative") {
  auto dbl = make_doubling();
  InducingScheme s = build_first_return_scheme(dbl, Interval{0.0, 0.5}, 3);
  int tau1 = -1;
  for (const auto& e : s.elements)
    if (e.tau == 1) tau1 = e.symbol;
  REQUIRE(tau1 >= 0);

  std::vector<double> w(s.alphabet(), 0.0);
  w[tau1] = 1.0;
  TowerMeasure mu = lift(depth1_measure(s, w), s);
  CHECK(mu.Q == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<int> word(12, tau1);
  double rep = code_word(s, word, false);
  SampleSet set = sample_lift(s, mu, 200, 99);
  for (double x : set.points) CHECK(x == rep);
}

TEST_CASE("lyapunov exponent on doubling measures is log 2") {
  InducingScheme s = build_doubling_scheme("plain", 29);
  TowerMeasure mu = lebesgue_tower(s);

  LyapunovReport rep = lyapunov(s, mu, 500, 100, 31337);
  CHECK(std::fabs(rep.value - kLog2) < 1e-12);
  CHECK(rep.se < 1e-12);
  CHECK(rep.skipped == 0);
  CHECK(rep.bracket_known);
  CHECK(std::fabs(rep.bracket_lo - kLog2) < 1e-9);
  CHECK(std::fabs(rep.bracket_hi - kLog2) < 1e-9);
  CHECK(rep.bracket_pass);
}

TEST_CASE("lyapunov bracket covers the induced gibbs lift on the refined scheme") {
  InducingScheme s = build_doubling_scheme("refined", 5);
  InducedPotential pot = induce(s, PotentialSpec{"constant", 0.0, -2.0, {}});
  ShiftPotential sp = make_shift_potential(s, pot, 1);
  CylinderMeasure nu = gibbs_weights(sp, 1);
  TowerMeasure mu = lift(nu, s);

  LyapunovReport rep = lyapunov(s, mu, 200, 50, 4242);
  CHECK(std::fabs(rep.value - kLog2) < 1e-12);
  CHECK(std::fabs(rep.bracket_lo - kLog2) < 1e-9);
  CHECK(std::fabs(rep.bracket_hi - kLog2) < 1e-9);
  CHECK(rep.bracket_pass);
}

TEST_CASE("unimodal orbit average matches the known exponent at a=2") {
  auto map = make_quadratic(2.0);
  long skipped = 0;
  double v = lyapunov_orbit(*map, 0.6123598762, 1000000, 1e-8, &skipped);
  CHECK(std::fabs(v - kLog2) < 0.01);
  CHECK(skipped < 100);
}

TEST_CASE("identity observable correlations decay dyadically") {
  InducingScheme s = build_doubling_scheme("plain", 29);
  TowerMeasure mu = lebesgue_tower(s);
  Observable h = make_observable("x");

  CorrelationFit fit = correlation_fit(s, mu, h, h, 10, 1000000, 777001);
  REQUIRE(fit.lags.size() == 11);
  CHECK(std::fabs(fit.corr[0] - 1.0 / 12.0) < 1e-3);
  for (int k = 1; k <= 6; ++k) {
    double exact = std::pow(0.5, k) / 12.0;
    CHECK(std::fabs(fit.corr[k] - exact) < 4.0 * fit.se[k] + 1e-6);
  }
  CHECK(!fit.all_noise);
  CHECK(fit.pass);
  CHECK(fit.fit_lags >= 4);
  CHECK(fit.theta > 0.45);
  CHECK(fit.theta < 0.55);
  CHECK(fit.K > 0.04);
  CHECK(fit.K < 0.17);

  std::string csv = correlation_to_csv(fit);
  CHECK(csv.rfind("lag,corr,se\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 12);
}

TEST_CASE("fast mixing observable reads as noise at every positive lag") {
  InducingScheme s = build_doubling_scheme("plain", 29);
  TowerMeasure mu = lebesgue_tower(s);
  Observable h = make_observable("cos2pi");

  CorrelationFit fit = correlation_fit(s, mu, h, h, 10, 200000, 55008);
  CHECK(std::fabs(fit.corr[0] - 0.5) < 1e-2);
  for (int k = 1; k <= 10; ++k) CHECK(std::fabs(fit.corr[k]) <= 3.0 * fit.se[k]);
  CHECK(fit.all_noise);
  CHECK(fit.pass);
  CHECK(fit.theta == 0.0);
}

TEST_CASE("constant observable has identically zero correlations") {
  InducingScheme s = build_doubling_scheme("plain", 12);
  TowerMeasure mu = lebesgue_tower(s);
  Observable h = make_observable("constant");

  CorrelationFit fit = correlation_fit(s, mu, h, h, 5, 1000, 1);
  for (std::size_t k = 0; k < fit.corr.size(); ++k) {
    CHECK(fit.corr[k] == 0.0);
    CHECK(fit.se[k] == 0.0);
  }
  CHECK(fit.all_noise);
}

TEST_CASE("block sums satisfy the central limit scaling") {
  InducingScheme s = build_doubling_scheme("plain", 29);
  TowerMeasure mu = lebesgue_tower(s);
  Observable h = make_observable("x-centered");

  CLTReport rep = clt_test(s, mu, h, 1 << 14, 2000, 90210, 4);
  CHECK(std::fabs(rep.gamma - 0.5) < 0.05);
  CHECK(rep.ks < 0.05);
  CHECK(rep.scale_ratio > 0.8);
  CHECK(rep.scale_ratio < 1.2);
  CHECK(std::fabs(rep.mean) < 0.002);

  std::string js = clt_to_json(rep);
  CHECK(js.find("\"gamma\":") != std::string::npos);
  CHECK(js.find("\"ks\":") != std::string::npos);
  CHECK(js.front() == '{');
  CHECK(js.back() == '}');
}

TEST_CASE("coboundary observable trips the degenerate variance check") {
  InducingScheme s = build_doubling_scheme("plain", 29);
  TowerMeasure mu = lebesgue_tower(s);
  Observable h = make_observable("coboundary-sin");

  try {
    clt_test(s, mu, h, 1 << 14, 400, 90210, 4);
    FAIL("expected DegenerateVariance");
  } catch (const Error& e) {
    CHECK(e.cond() == Cond::DegenerateVariance);
  }
}

TEST_CASE("identical seeds give identical results at any worker count") {
  InducingScheme s = build_doubling_scheme("plain", 20);
  TowerMeasure mu = lebesgue_tower(s);
  Observable h = make_observable("x-centered");

  CLTReport a = clt_test(s, mu, h, 1024, 64, 5150, 1);
  CLTReport b = clt_test(s, mu, h, 1024, 64, 5150, 8);
  CHECK(a.gamma == b.gamma);
  CHECK(a.ks == b.ks);
  CHECK(a.gamma_coarse == b.gamma_coarse);
  CHECK(a.mean == b.mean);

  CorrelationFit fa = correlation_fit(s, mu, h, h, 6, 20000, 5150, 1);
  CorrelationFit fb = correlation_fit(s, mu, h, h, 6, 20000, 5150, 8);
  for (std::size_t k = 0; k < fa.corr.size(); ++k) {
    CHECK(fa.corr[k] == fb.corr[k]);
    CHECK(fa.se[k] == fb.se[k]);
  }
  CHECK(fa.theta == fb.theta);
}

TEST_CASE("observable registry") {
  CHECK(make_observable("x").f(0.3) == 0.3);
  CHECK(std::fabs(make_observable("cos2pi").f(0.25)) < 1e-12);
  CHECK(std::fabs(make_observable("coboundary-sin").f(0.5)) < 1e-12);
  CHECK(make_observable("constant").f(0.9) == 1.0);
  CHECK_THROWS_AS(make_observable("nope"), Error);
}
