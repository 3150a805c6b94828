#include <cmath>
#include <cstddef>
#include <memory>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "thermoscheme/scheme.hpp"
#include "thermoscheme/shift.hpp"

using namespace thermoscheme;

namespace {

ShiftPotential zero_potential(int alphabet) {
  ShiftPotential pot;
  pot.alphabet = alphabet;
  pot.depth = 1;
  pot.tau.assign(static_cast<size_t>(alphabet), 1);
  pot.eval_window = [](const std::vector<int>&) { return 0.0; };
  return pot;
}

// phi-bar of the induced map evaluated at the coded periodic representative
ShiftPotential scheme_log_dF_potential(std::shared_ptr<InducingScheme> s, int depth,
                                       double tail_weight = 0.0) {
  ShiftPotential pot;
  pot.alphabet = s->alphabet();
  pot.depth = depth;
  pot.tau.resize(static_cast<size_t>(s->alphabet()));
  for (const auto& e : s->elements) pot.tau[static_cast<size_t>(e.symbol)] = e.tau;
  pot.tail_weight = tail_weight;
  pot.eval_window = [s](const std::vector<int>& w) {
    double x = code_word(*s, w, true);
    return -induced_log_dF(*s, x);
  };
  return pot;
}

double mem2_value(int a, int b) {
  static const double p[3] = {0.5, 0.3, 0.2};
  static const double d[3][3] = {{1, -1, 0}, {0, 1, -1}, {-1, 0, 1}};
  return std::log(p[b] * (1.0 + 0.03 * d[a][b]));
}

ShiftPotential mem2_potential() {
  ShiftPotential pot;
  pot.alphabet = 3;
  pot.depth = 2;
  pot.tau.assign(3, 1);
  pot.eval_window = [](const std::vector<int>& w) { return mem2_value(w[0], w[1]); };
  return pot;
}

}  // namespace

TEST_CASE("potential window evaluation wraps cyclically") {
  auto pot = mem2_potential();
  std::vector<int> w{0, 1, 2};
  CHECK(potential_value(pot, w, 0) == doctest::Approx(mem2_value(0, 1)).epsilon(1e-15));
  CHECK(potential_value(pot, w, 2) == doctest::Approx(mem2_value(2, 0)).epsilon(1e-15));
  double cyc = mem2_value(0, 1) + mem2_value(1, 2) + mem2_value(2, 0);
  CHECK(potential_cycle_sum(pot, w) == doctest::Approx(cyc).epsilon(1e-14));
  CHECK_THROWS_AS(potential_value(pot, {}, 0), Error);
  CHECK_THROWS_AS(potential_value(pot, {0, 9}, 0), Error);
}

TEST_CASE("operator pressure on the full 2-shift") {
  auto pot = zero_potential(2);
  CHECK(std::fabs(gurevich_pressure_operator(pot, 1) - std::log(2.0)) < 1e-12);
  CHECK(std::fabs(gurevich_pressure_operator(pot, 3) - std::log(2.0)) < 1e-12);

  auto bern = first_symbol_potential({std::log(1.0 / 3.0), std::log(2.0 / 3.0)});
  CHECK(std::fabs(gurevich_pressure_operator(bern, 1)) < 1e-12);
}

TEST_CASE("orbit pressure estimates on the full 2-shift") {
  auto pot = zero_potential(2);
  auto est = gurevich_pressure_orbits(pot, 16, 0);
  REQUIRE(est.size() == 16);
  for (const auto& [n, e] : est) CHECK(std::fabs(e - std::log(2.0)) < 1e-12);
  CHECK(est.back().n == 16);

  auto bern = first_symbol_potential({std::log(0.3), std::log(0.7)});
  auto est0 = gurevich_pressure_orbits(bern, 12, 0);
  auto est1 = gurevich_pressure_orbits(bern, 12, 1);
  for (size_t k = 0; k < est0.size(); ++k) {
    CHECK(std::fabs(est0[k].estimate) < 1e-12);
    CHECK(std::fabs(est0[k].estimate - est1[k].estimate) < 1e-13);
  }

  CHECK_THROWS_AS(gurevich_pressure_orbits(pot, 80, 0), Error);
  CHECK_THROWS_AS(gurevich_pressure_orbits(pot, 4, 5), Error);
}

TEST_CASE("dyadic induced potential pressure routes agree") {
  auto s30 = std::make_shared<InducingScheme>(build_doubling_scheme("plain", 29));
  auto pot30 = scheme_log_dF_potential(s30, 2, std::ldexp(1.0, -30));
  double op30 = gurevich_pressure_operator(pot30, 2);
  double expect30 = std::log1p(-std::ldexp(1.0, -30));
  CHECK(std::fabs(op30 - expect30) < 1e-11);

  auto s20 = std::make_shared<InducingScheme>(build_doubling_scheme("plain", 19));
  auto pot20 = scheme_log_dF_potential(s20, 1, std::ldexp(1.0, -20));
  auto est = gurevich_pressure_orbits(pot20, 10, 0);
  double expect20 = std::log1p(-std::ldexp(1.0, -20));
  CHECK(std::fabs(est.back().estimate) < 2e-3);
  CHECK(std::fabs(est.back().estimate - expect20) < 1e-12);

  double op20 = gurevich_pressure_operator(pot20, 2);
  auto m20 = gibbs_weights(pot20, 1);
  CHECK(std::fabs(op20 - est.back().estimate) < std::max(5e-3, m20.leakage));
}

TEST_CASE("gibbs weights for first-symbol and zero potentials") {
  auto bern = first_symbol_potential({std::log(1.0 / 3.0), std::log(2.0 / 3.0)});
  auto m = gibbs_weights(bern, 1);
  REQUIRE(m.weights.size() == 2);
  CHECK(m.weight_of({0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(m.weight_of({1}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(std::fabs(m.C1 - 1.0) < 1e-10);
  CHECK(std::fabs(m.C2 - 1.0) < 1e-10);
  CHECK(m.weight_of({0, 1}) == 0.0);

  auto z = zero_potential(2);
  auto mu = gibbs_weights(z, 3);
  REQUIRE(mu.weights.size() == 8);
  double tot = 0;
  for (const auto& [w, v] : mu.weights) {
    CHECK(v == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(v > 0);
    tot += v;
  }
  CHECK(std::fabs(tot - 1.0) < 1e-10);
  CHECK(std::fabs(mu.C1 - 1.0) < 1e-10);
  CHECK(std::fabs(mu.C2 - 1.0) < 1e-10);
  CHECK(mu.consistency_defect < 1e-12);
}

TEST_CASE("memory-2 gibbs weights match brute-force cyclic sums") {
  auto pot = mem2_potential();
  auto m = gibbs_weights(pot, 3);
  REQUIRE(m.weights.size() == 27);

  const int L = 8;
  int total = 1;
  for (int k = 0; k < L; ++k) total *= 3;
  std::vector<double> mass(27, 0.0);
  double Z = 0;
  std::vector<int> u(L);
  for (int idx = 0; idx < total; ++idx) {
    int v = idx;
    for (int k = L - 1; k >= 0; --k) {
      u[static_cast<size_t>(k)] = v % 3;
      v /= 3;
    }
    double phi = 0;
    for (int i = 0; i < L; ++i) phi += mem2_value(u[static_cast<size_t>(i)], u[static_cast<size_t>((i + 1) % L)]);
    double w = std::exp(phi);
    Z += w;
    mass[static_cast<size_t>(u[0] * 9 + u[1] * 3 + u[2])] += w;
  }
  for (int i = 0; i < 27; ++i) {
    double brute = mass[static_cast<size_t>(i)] / Z;
    CHECK(std::fabs(m.weights[static_cast<size_t>(i)].second - brute) < 1e-6);
    CHECK(m.weights[static_cast<size_t>(i)].second > 0);
  }
  CHECK(m.consistency_defect < 1e-10);

  double sum = 0;
  for (const auto& [w, v] : m.weights) sum += v;
  CHECK(std::fabs(sum - 1.0) < 1e-10);

  double op = gurevich_pressure_operator(pot, 2);
  auto est = gurevich_pressure_orbits(pot, 12, 0);
  CHECK(std::fabs(op - est.back().estimate) < 5e-3);
}

TEST_CASE("gibbs constants are stable under audit depth growth") {
  auto pot = mem2_potential();
  auto m = gibbs_weights(pot, 3);
  auto [c1a, c2a] = gibbs_constants(m, pot, 4);
  auto [c1b, c2b] = gibbs_constants(m, pot, 6);
  CHECK(c1a > 0);
  CHECK(c1a <= c2a);
  CHECK(std::fabs(c1b / c1a - 1.0) < 0.1);
  CHECK(std::fabs(c2b / c2a - 1.0) < 0.1);
  CHECK(m.C1 == c1b);
  CHECK(m.C2 == c2b);
}

TEST_CASE("variation vanishes beyond the evaluator memory") {
  auto bern = first_symbol_potential({std::log(0.4), std::log(0.6)});
  CHECK(variation(bern, 1) == 0.0);
  CHECK(variation(bern, 3) == 0.0);

  auto pot = mem2_potential();
  CHECK(variation(pot, 1) > 0.0);
  CHECK(variation(pot, 2) == 0.0);

  auto s = std::make_shared<InducingScheme>(build_doubling_scheme("plain", 9));
  auto dy = scheme_log_dF_potential(s, 4);
  CHECK(variation(dy, 1) == 0.0);
  CHECK(variation(dy, 3) == 0.0);

  ShiftPotential deep = bern;
  deep.depth = 100;
  CHECK_THROWS_AS(variation(deep, 1), Error);
  CHECK_THROWS_AS(variation(bern, 0), Error);
}

TEST_CASE("variation decays on the quadratic scheme") {
  auto s = std::make_shared<InducingScheme>(build_unimodal_scheme(make_quadratic(1.9), 12));
  auto pot = scheme_log_dF_potential(s, 9);
  std::vector<double> ns, logv;
  double v1 = 0;
  for (int n = 1; n <= 6; ++n) {
    double v = variation(pot, n, 120);
    if (n == 1) v1 = v;
    if (v > 0) {
      ns.push_back(n);
      logv.push_back(std::log(v));
    }
  }
  CHECK(v1 > 0);
  REQUIRE(ns.size() >= 3);
  LinFit fit = fit_linear(ns, logv);
  CHECK(fit.slope < 0);
  CHECK(std::exp(fit.slope) < 1.0);
}

TEST_CASE("state caps reported as CapExceeded") {
  std::vector<double> vals(65814, std::log(1.0 / 65814));
  auto big = first_symbol_potential(vals);
  try {
    gurevich_pressure_orbits(big, 4, 0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.cond() == Cond::CapExceeded);
  }
  std::vector<double> vals2(2000, 0.0);
  auto wide = first_symbol_potential(vals2);
  try {
    gurevich_pressure_operator(wide, 2);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.cond() == Cond::CapExceeded);
  }
}

TEST_CASE("worker count does not change results") {
  std::vector<double> vals;
  vals.reserve(70000);
  for (int i = 0; i < 70000; ++i) vals.push_back(std::log((1.0 + (i % 7)) / 70000.0));
  auto pot = first_symbol_potential(vals);
  auto a = gibbs_weights(pot, 1, 1);
  auto b = gibbs_weights(pot, 1, 4);
  REQUIRE(a.weights.size() == b.weights.size());
  CHECK(a.P_G == b.P_G);
  for (size_t i = 0; i < a.weights.size(); ++i)
    CHECK(a.weights[i].second == b.weights[i].second);
}

TEST_CASE("cylinder measure csv layout") {
  auto pot = mem2_potential();
  auto m = gibbs_weights(pot, 2);
  std::string csv = cylinder_measure_to_csv(m);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "P_G,C1,C2,leakage");
  std::getline(in, line);
  CHECK(line.find(',') != std::string::npos);
  std::getline(in, line);
  CHECK(line == "word,weight");
  size_t rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == m.weights.size());
  CHECK(csv.find("0-0,") != std::string::npos);
}
