#include <cmath>
#include <random>

#include "doctest.h"
#include "thermoscheme/maps.hpp"

using namespace thermoscheme;

TEST_CASE("doubling map evaluation and derivatives") {
  auto f = make_doubling();
  CHECK(eval(*f, 0.3, 1) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(eval(*f, 0.3, 2) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(f->apply(0.5) == doctest::Approx(1.0));
  CHECK(f->apply(1.0) == doctest::Approx(1.0));
  CHECK(f->derivative(0.7) == 2.0);
  auto lg = log_deriv_orbit(*f, 0.3, 5);
  REQUIRE(lg.size() == 5);
  for (double v : lg) CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(eval(*f, 1.5, 1), Error);
  try {
    eval(*f, 1.5, 1);
  } catch (const Error& e) {
    CHECK(e.cond() == Cond::OutOfDomain);
  }
}

TEST_CASE("tent map evaluation") {
  auto f = make_tent(2.0);
  CHECK(eval(*f, 0.4, 1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(f->apply(0.75) == doctest::Approx(0.5));
  CHECK(f->derivative(0.75) == -2.0);
  CHECK_THROWS_AS(make_tent(0.9), Error);
  CHECK_THROWS_AS(make_tent(2.5), Error);
}

TEST_CASE("quadratic family geometry") {
  auto f = make_quadratic(2.0);
  CHECK(f->beta() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f->apply(0.0) == doctest::Approx(1.0));
  CHECK(eval(*f, 0.0, 2) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(f->apply(-f->beta()) == doctest::Approx(-f->beta()));
  CHECK(f->alpha() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(f->derivative(f->alpha()) == doctest::Approx(-2.0));

  auto g = make_quadratic(1.4);
  double beta = (1.0 + std::sqrt(1.0 + 4.0 * 1.4)) / (2.0 * 1.4);
  CHECK(g->beta() == doctest::Approx(beta).epsilon(1e-15));
  CHECK(g->apply(-g->beta()) == doctest::Approx(-g->beta()).epsilon(1e-12));
  double al = g->alpha();
  CHECK(g->apply(al) == doctest::Approx(al).epsilon(1e-12));
  CHECK(std::fabs(g->derivative(al)) > 1.0);

  // below a = 3/4 the interior fixed point stops being expanding
  auto h = make_quadratic(0.5);
  CHECK_THROWS_AS(h->alpha(), Error);
  try {
    h->alpha();
  } catch (const Error& e) {
    CHECK(e.cond() == Cond::NoAlpha);
  }
  CHECK_THROWS_AS(make_quadratic(-1.0), Error);
  CHECK_THROWS_AS(make_quadratic(2.3), Error);
}

TEST_CASE("log_deriv_orbit rejects critical passes") {
  auto f = make_quadratic(2.0);
  auto lg = log_deriv_orbit(*f, 0.5, 3);
  REQUIRE(lg.size() == 3);
  for (double v : lg) CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  try {
    log_deriv_orbit(*f, 0.0, 1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.cond() == Cond::NearCritical);
  }
}

TEST_CASE("inverse_branch_compose on the doubling map") {
  auto f = make_doubling();
  Interval a = inverse_branch_compose(*f, {0}, Interval{0.0, 1.0});
  CHECK(a.lo == doctest::Approx(0.0));
  CHECK(a.hi == doctest::Approx(0.5));
  Interval b = inverse_branch_compose(*f, {0, 0}, Interval{0.0, 1.0});
  CHECK(b.lo == doctest::Approx(0.0));
  CHECK(b.hi == doctest::Approx(0.25));
  Interval c = inverse_branch_compose(*f, {1}, Interval{0.0, 0.25});
  CHECK(c.lo == doctest::Approx(0.5));
  CHECK(c.hi == doctest::Approx(0.625));
  CHECK_THROWS_AS(inverse_branch_compose(*f, {2}, Interval{0.0, 1.0}), Error);
}

TEST_CASE("inverse_branch_compose reports empty preimages") {
  auto f = make_tent(1.5);
  try {
    inverse_branch_compose(*f, {0}, Interval{0.8, 0.9});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.cond() == Cond::EmptyPreimage);
  }
}

TEST_CASE("branch inverses invert forwards") {
  std::mt19937_64 rng(12345);
  for (auto f : {make_doubling(), make_tent(2.0), make_tent(1.3)}) {
    for (const auto& br : f->branches()) {
      std::uniform_real_distribution<double> dist(br.domain.lo, br.domain.hi);
      for (int i = 0; i < 1000; ++i) {
        double x = dist(rng);
        if (!br.domain.contains_oc(x)) continue;
        CHECK(std::fabs(br.inverse(br.forward(x)) - x) < 1e-12);
      }
    }
  }
  auto q = make_quadratic(1.8);
  for (const auto& br : q->branches()) {
    std::uniform_real_distribution<double> dist(br.domain.lo, br.domain.hi);
    for (int i = 0; i < 1000; ++i) {
      double x = dist(rng);
      if (!br.domain.contains_oc(x)) continue;
      CHECK(std::fabs(br.inverse(br.forward(x)) - x) < 1e-9);
    }
  }
}

TEST_CASE("cylinder intervals nest and contract") {
  auto f = make_doubling();
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> sym(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> word;
    Interval prev{0.0, 1.0};
    int len = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < len; ++k) {
      word.push_back(sym(rng));
      Interval cur = inverse_branch_compose(*f, word, Interval{0.0, 1.0});
      CHECK(prev.contains(cur, 1e-12));
      CHECK(cur.length() ==
            doctest::Approx(std::pow(2.0, -static_cast<double>(word.size()))).epsilon(1e-12));
      prev = cur;
    }
  }
}

TEST_CASE("map descriptors round-trip through json") {
  for (auto f : {make_doubling(), make_tent(1.7)}) {
    std::string text = map_to_json(*f);
    auto g = map_from_json(text);
    CHECK(g->kind() == f->kind());
    REQUIRE(g->branches().size() == f->branches().size());
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dist(f->ambient().lo, f->ambient().hi);
    for (int i = 0; i < 200; ++i) {
      double x = dist(rng);
      if (f->branch_index(x) < 0) continue;
      CHECK(f->apply(x) == doctest::Approx(g->apply(x)).epsilon(1e-15));
    }
  }
  auto q = make_quadratic(1.9);
  auto q2 = map_from_json(map_to_json(*q));
  CHECK(q2->kind() == "quadratic");
  CHECK(q2->apply(0.3) == doctest::Approx(q->apply(0.3)).epsilon(1e-15));
  CHECK_THROWS_AS(map_from_json("{\"kind\": \"lorenz\"}"), Error);
  CHECK_THROWS_AS(map_from_json("not json"), Error);
}
