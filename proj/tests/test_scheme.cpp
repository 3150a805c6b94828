#include <cmath>
#include <numeric>

#include "doctest.h"
#include "thermoscheme/scheme.hpp"

using namespace thermoscheme;

TEST_CASE("plain dyadic scheme geometry") {
  auto s = build_doubling_scheme("plain", 3);
  REQUIRE(s.alphabet() == 4);
  double want_len[4] = {0.5, 0.25, 0.125, 0.0625};
  for (int i = 0; i < 4; ++i) {
    CHECK(s.elements[i].tau == i + 1);
    CHECK(s.elements[i].J.length() == doctest::Approx(want_len[i]).epsilon(1e-15));
    CHECK(static_cast<int>(s.elements[i].branch_word.size()) == i + 1);
  }
  CHECK(s.base.lo == 0.0);
  CHECK(s.base.hi == 1.0);

  auto tiny = build_doubling_scheme("plain", 1);
  REQUIRE(tiny.alphabet() == 2);
  CHECK(tiny.total_len() == doctest::Approx(0.75).epsilon(1e-15));

  auto big = build_doubling_scheme("plain", 29);
  REQUIRE(big.alphabet() == 30);
  CHECK(big.max_tau() == 30);
  CHECK(big.W.lo == doctest::Approx(std::ldexp(1.0, -30)));
  CHECK_THROWS_AS(build_doubling_scheme("spiral", 3), Error);
  CHECK_THROWS_AS(build_doubling_scheme("plain", 0), Error);
}

TEST_CASE("refined dyadic scheme geometry") {
  auto s = build_doubling_scheme("refined", 1);
  CHECK(s.S_of(2) == 2);
  CHECK(s.S_of(4) == 4);
  REQUIRE(s.alphabet() == 6);
  for (const auto& e : s.elements)
    CHECK(e.J.length() == doctest::Approx(std::ldexp(1.0, -e.tau)).epsilon(1e-15));

  auto s3 = build_doubling_scheme("refined", 3);
  CHECK(s3.S_of(2) == 2);
  CHECK(s3.S_of(4) == 4);
  CHECK(s3.S_of(7) == 16);
  CHECK(s3.S_of(12) == 256);
  CHECK(s3.alphabet() == 2 + 4 + 16 + 256);

  auto s4 = build_doubling_scheme("refined", 4);
  CHECK(s4.alphabet() == 65814);
  CHECK(s4.fully_materialized);
  CHECK(s4.S_of(21) == 65536);

  auto s5 = build_doubling_scheme("refined", 5);
  CHECK_FALSE(s5.fully_materialized);
  CHECK(s5.S_of(38) == (std::uint64_t{1} << 32));
  CHECK(s5.alphabet() == 65814);

  CHECK_THROWS_AS(build_doubling_scheme("refined", 6), Error);
}

TEST_CASE("first-return construction on the doubling map") {
  auto s = build_first_return_scheme(make_doubling(), Interval{0.5, 1.0}, 3);
  REQUIRE(s.alphabet() == 3);
  CHECK(s.elements[0].tau == 1);
  CHECK(s.elements[0].J.lo == doctest::Approx(0.75));
  CHECK(s.elements[0].J.hi == doctest::Approx(1.0));
  CHECK(s.elements[1].tau == 2);
  CHECK(s.elements[1].J.lo == doctest::Approx(0.625));
  CHECK(s.elements[1].J.hi == doctest::Approx(0.75));
  CHECK(s.elements[2].tau == 3);
  CHECK(s.elements[2].J.lo == doctest::Approx(0.5625));
  CHECK(s.elements[2].J.hi == doctest::Approx(0.625));
  CHECK(s.unresolved_len == doctest::Approx(0.0625).epsilon(1e-12));

  auto full = build_first_return_scheme(make_doubling(), Interval{0.0, 1.0}, 1);
  REQUIRE(full.alphabet() == 2);
  CHECK(full.elements[0].tau == 1);
  CHECK(full.elements[1].tau == 1);
  CHECK(full.total_len() == doctest::Approx(1.0));
}

TEST_CASE("first-return construction on tent maps") {
  auto s = build_first_return_scheme(make_tent(2.0), Interval{0.5, 1.0}, 2);
  REQUIRE(s.alphabet() == 2);
  CHECK(s.elements[0].tau == 1);
  CHECK(s.elements[0].J.lo == doctest::Approx(0.5));
  CHECK(s.elements[0].J.hi == doctest::Approx(0.75));
  CHECK(s.elements[1].tau == 2);
  CHECK(s.elements[1].J.lo == doctest::Approx(0.75));
  CHECK(s.elements[1].J.hi == doctest::Approx(0.875));

  try {
    build_first_return_scheme(make_tent(1.5), Interval{0.5, 1.0}, 3);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.cond() == Cond::NotMarkov);
  }
}

TEST_CASE("induced map evaluation") {
  auto s = build_doubling_scheme("plain", 5);
  auto [y0, s0] = induced_map(s, 0.75);
  CHECK(y0 == doctest::Approx(0.5));
  CHECK(s0 == 0);
  auto [y1, s1] = induced_map(s, 0.3);
  CHECK(y1 == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(s1 == 1);
  try {
    induced_map(s, 0.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.cond() == Cond::NotInW);
  }
  CHECK(induced_log_dF(s, 0.3) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("coding of finite and periodic words") {
  auto s = build_doubling_scheme("plain", 8);
  CHECK(code_word(s, {0}, false) == doctest::Approx(0.75));
  CHECK(code_word(s, {0}, true) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(code_word(s, {1}, true) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  double p2 = code_word(s, {0, 1}, true);
  CHECK(p2 == doctest::Approx(5.0 / 7.0).epsilon(1e-10));
  double img = induced_map(s, induced_map(s, p2).first).first;
  CHECK(std::fabs(img - p2) < 1e-10);

  auto full = build_first_return_scheme(make_doubling(), Interval{0.0, 1.0}, 1);
  CHECK(code_word(full, {0, 1}, true) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(code_word(full, {1, 0, 1}, true) == doctest::Approx(5.0 / 7.0).epsilon(1e-10));
  CHECK_THROWS_AS(code_word(s, {}, false), Error);
}

TEST_CASE("cylinder intervals nest under word extension") {
  auto s = build_doubling_scheme("refined", 2);
  Interval a = cylinder_interval(s, {3});
  Interval b = cylinder_interval(s, {3, 7});
  CHECK(a.contains(b, 1e-12));
  CHECK(b.length() ==
        doctest::Approx(a.length() * s.elements[7].J.length()).epsilon(1e-12));
}

TEST_CASE("scheme verification on the plain dyadic scheme") {
  auto s = build_doubling_scheme("plain", 29);
  auto rep = verify_scheme(s, 6);
  CHECK(rep.h1_pass);
  CHECK(rep.h1_max_defect == 0.0);
  CHECK(rep.h2_pass);
  CHECK(std::fabs(rep.lambda1 - 2.0) < 1e-6);
  CHECK(rep.c1 == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(rep.tail_pass);
  for (const auto& [n, cnt] : rep.S_counts) CHECK(cnt == 1);
  CHECK(rep.gamma == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.distortion_max == 0.0);
  CHECK(rep.c2 == 0.0);
  CHECK(rep.distortion_pass);
  CHECK(rep.lambda3 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rep.c3 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.c4 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("scheme verification on the refined scheme") {
  auto s = build_doubling_scheme("refined", 3);
  auto rep = verify_scheme(s, 5);
  CHECK(rep.h1_pass);
  CHECK(rep.h2_pass);
  CHECK(rep.S_counts.at(2) == 2);
  CHECK(rep.S_counts.at(4) == 4);
  CHECK(rep.S_counts.at(7) == 16);
  CHECK(rep.S_counts.at(12) == 256);
  CHECK(rep.lambda1 > 1.0);
  CHECK(rep.lambda3 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rep.gamma > 1.0);
  CHECK(rep.lambda1 <= rep.lambda3 + 1e-9);
}

TEST_CASE("tower slices stay inside the ambient interval") {
  auto s = build_doubling_scheme("plain", 29);
  auto slices = tower_slices(s);
  CHECK(slices.size() == 465);
  double level0 = 0;
  for (const auto& sl : slices) {
    CHECK(sl.image.lo >= s.map->ambient().lo - 1e-12);
    CHECK(sl.image.hi <= s.map->ambient().hi + 1e-12);
    if (sl.k == 0) level0 += sl.image.length();
  }
  CHECK(level0 == doctest::Approx(s.total_len()).epsilon(1e-12));
  auto s1 = build_doubling_scheme("plain", 2);
  auto sl1 = tower_slices(s1);
  CHECK(sl1[2].symbol == 1);
  CHECK(sl1[2].k == 1);
  CHECK(sl1[2].image.lo == doctest::Approx(0.5));
  CHECK(sl1[2].image.hi == doctest::Approx(1.0));
}

TEST_CASE("unimodal scheme construction") {
  auto m19 = make_quadratic(1.9);
  auto s = build_unimodal_scheme(m19, 12);
  CHECK(s.alphabet() > 0);
  CHECK(s.base_A.has_value());
  for (const auto& e : s.elements) {
    CHECK(e.J.lo > s.base_A->lo);
    CHECK(e.J.hi < s.base_A->hi);
  }
  auto rep = verify_scheme(s, 4);
  CHECK(rep.h1_pass);
  CHECK(rep.lambda1 > 1.0);

  auto meps = make_quadratic(1.999);
  auto seps = build_unimodal_scheme(meps, 12);
  CHECK(seps.alphabet() > 0);
  auto repeps = verify_scheme(seps, 4);
  CHECK(repeps.h1_pass);
  CHECK(repeps.h1_max_defect < 1e-9);
  CHECK(repeps.lambda1 > 1.0);
}

TEST_CASE("critical orbit entry time") {
  try {
    compute_N0(*make_quadratic(2.0), 100);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.cond() == Cond::CapExceeded);
  }
  CHECK(compute_N0(*make_quadratic(1.2), 100) == 2);

  auto m = make_quadratic(1.999);
  int n0 = compute_N0(*m, 10000);
  double v = 0.0;
  int direct = -1;
  double alpha = m->alpha();
  for (int n = 1; n <= 10000; ++n) {
    v = m->apply(v);
    if (std::fabs(v) < alpha) {
      direct = n;
      break;
    }
  }
  CHECK(n0 == direct);
  CHECK(n0 >= 2);
}

TEST_CASE("strong regularity budget check") {
  auto m = make_quadratic(1.999);
  auto s = build_unimodal_scheme(m, 12);
  auto vac = strongly_regular_check(*m, s, 0, 10, 0.05);
  CHECK(vac.pass);

  int n0 = compute_N0(*m, 10000);
  double lo = std::pow(std::log(static_cast<double>(n0)), 2.0);
  double hi = 2.0 * n0 / 3.0;
  int mbar = static_cast<int>(std::floor((lo + hi) / 2.0));
  if (!(lo < mbar && mbar < hi)) mbar = static_cast<int>(std::ceil(lo + 0.5));
  REQUIRE(lo < mbar);
  REQUIRE(mbar < hi);

  // a synthetic scheme whose first induced return already overshoots the budget
  double z1 = eval(*m, 0.0, n0);
  InducingScheme synth;
  synth.map = m;
  synth.variant = "unimodal";
  synth.base = s.base;
  synth.W = s.W;
  BasicElement e;
  e.J = Interval{z1 - 1e-4, z1 + 1e-4};
  e.tau = std::max(mbar, 1);
  e.branch_word.assign(static_cast<size_t>(e.tau), 0);
  synth.elements.push_back(e);
  LevelClass c;
  c.level = 0;
  c.tau = e.tau;
  c.count = 1;
  c.piece_len = c.total_len = e.J.length();
  synth.classes.push_back(c);
  synth.finalize();
  auto bad = strongly_regular_check(*m, synth, 5, mbar, 0.05);
  CHECK_FALSE(bad.pass);
  CHECK(bad.first_fail_k == 1);

  CHECK_THROWS_AS(strongly_regular_check(*m, s, 5, 10000, 0.05), Error);
  CHECK_THROWS_AS(strongly_regular_check(*m, s, 5, mbar, 1.5), Error);
}

TEST_CASE("scheme json round-trip") {
  for (auto s : {build_doubling_scheme("plain", 5), build_doubling_scheme("refined", 2),
                 build_first_return_scheme(make_doubling(), Interval{0.5, 1.0}, 4)}) {
    std::string text = scheme_to_json(s);
    auto t = scheme_from_json(text);
    REQUIRE(t.alphabet() == s.alphabet());
    CHECK(t.variant == s.variant);
    CHECK(t.base.lo == s.base.lo);
    CHECK(t.base.hi == s.base.hi);
    for (int i = 0; i < s.alphabet(); ++i) {
      CHECK(t.elements[i].tau == s.elements[i].tau);
      CHECK(t.elements[i].J.lo == doctest::Approx(s.elements[i].J.lo).epsilon(1e-15));
      CHECK(t.elements[i].branch_word == s.elements[i].branch_word);
    }
    CHECK(t.max_tau() == s.max_tau());
  }
  CHECK_THROWS_AS(scheme_from_json("{}"), Error);
  CHECK_THROWS_AS(scheme_from_json("broken"), Error);
}

TEST_CASE("corrupted scheme files fail revalidation") {
  auto s = build_doubling_scheme("plain", 5);
  std::string text = scheme_to_json(s);
  auto pos = text.find("\"tau\": 3");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 8, "\"tau\": 4");
  CHECK_THROWS_AS(scheme_from_json(text), Error);
}
