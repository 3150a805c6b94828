#include "thermoscheme/maps.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace thermoscheme {

namespace {

Interval sorted_interval(double a, double b) {
  return a <= b ? Interval{a, b} : Interval{b, a};
}

}  // namespace

int IntervalMap::branch_index(double x) const {
  for (size_t i = 0; i < branches_.size(); ++i) {
    if (branches_[i].contains(x)) return static_cast<int>(i);
  }
  return -1;
}

double IntervalMap::apply(double x) const {
  int i = branch_index(x);
  if (i < 0) fail(Cond::OutOfDomain, "no branch domain contains x=" + fmt_g17(x));
  return branches_[i].forward(x);
}

double IntervalMap::derivative(double x) const {
  int i = branch_index(x);
  if (i < 0) fail(Cond::OutOfDomain, "no branch domain contains x=" + fmt_g17(x));
  return branches_[i].derivative(x);
}

void IntervalMap::set_branches(std::vector<Branch> b) {
  branches_ = std::move(b);
  check_branch_invariants();
}

void IntervalMap::check_branch_invariants() const {
  if (branches_.empty()) fail(Cond::BadConfig, "map has no branches");
  for (const auto& b : branches_) {
    if (!b.domain.valid() || !(b.domain.length() > 0))
      fail(Cond::BadConfig, "branch domain degenerate");
    if (b.domain.lo < ambient_.lo - kEndpointTol || b.domain.hi > ambient_.hi + kEndpointTol)
      fail(Cond::BadConfig, "branch domain leaves ambient interval");
    if (b.dir != 1 && b.dir != -1) fail(Cond::BadConfig, "branch dir must be +1 or -1");
  }
  for (size_t i = 1; i < branches_.size(); ++i) {
    if (branches_[i].domain.lo < branches_[i - 1].domain.hi - kEndpointTol)
      fail(Cond::BadConfig, "branch domains overlap");
  }
}

PiecewiseMap::PiecewiseMap(std::string kind, Interval ambient, std::vector<Branch> branches,
                           std::vector<std::pair<std::string, double>> params)
    : IntervalMap(std::move(kind), ambient), params_(std::move(params)) {
  std::sort(branches.begin(), branches.end(),
            [](const Branch& a, const Branch& b) { return a.domain.lo < b.domain.lo; });
  set_branches(std::move(branches));
}

UnimodalMap::UnimodalMap(double a) : IntervalMap("quadratic", Interval{0, 0}), a_(a) {
  if (!(a > 0) || a > 2 + kEndpointTol)
    fail(Cond::BadConfig, "quadratic family needs 0 < a <= 2, got a=" + fmt_g17(a));
  beta_ = (1.0 + std::sqrt(1.0 + 4.0 * a)) / (2.0 * a);
  ambient_ = Interval{-beta_, beta_};

  Branch left;
  left.domain = Interval{-beta_, 0.0};
  left.dir = +1;
  left.forward = [a](double x) { return 1.0 - a * x * x; };
  left.derivative = [a](double x) { return -2.0 * a * x; };
  left.inverse = [a](double y) { return -std::sqrt(std::max(0.0, (1.0 - y) / a)); };
  left.image = Interval{-beta_, 1.0};

  Branch right;
  right.domain = Interval{0.0, beta_};
  right.dir = -1;
  right.forward = left.forward;
  right.derivative = left.derivative;
  right.inverse = [a](double y) { return std::sqrt(std::max(0.0, (1.0 - y) / a)); };
  right.image = Interval{-beta_, 1.0};

  set_branches({left, right});
}

double UnimodalMap::apply(double x) const {
  if (x < -beta_ - kEndpointTol || x > beta_ + kEndpointTol)
    fail(Cond::OutOfDomain, "x=" + fmt_g17(x) + " outside [-beta, beta]");
  return 1.0 - a_ * x * x;
}

double UnimodalMap::derivative(double x) const {
  if (x < -beta_ - kEndpointTol || x > beta_ + kEndpointTol)
    fail(Cond::OutOfDomain, "x=" + fmt_g17(x) + " outside [-beta, beta]");
  return -2.0 * a_ * x;
}

double UnimodalMap::alpha() const {
  double s = std::sqrt(1.0 + 4.0 * a_);
  if (!(s > 2.0))
    fail(Cond::NoAlpha, "interior fixed point not expanding at a=" + fmt_g17(a_) +
                            " (|df(alpha)|=" + fmt_g17(s - 1.0) + " <= 1)");
  return (s - 1.0) / (2.0 * a_);
}

std::shared_ptr<IntervalMap> make_doubling() {
  Branch lo;
  lo.domain = Interval{0.0, 0.5};
  lo.dir = +1;
  lo.forward = [](double x) { return 2.0 * x; };
  lo.derivative = [](double) { return 2.0; };
  lo.inverse = [](double y) { return y / 2.0; };
  lo.image = Interval{0.0, 1.0};

  Branch hi;
  hi.domain = Interval{0.5, 1.0};
  hi.dir = +1;
  hi.forward = [](double x) { return 2.0 * x - 1.0; };
  hi.derivative = [](double) { return 2.0; };
  hi.inverse = [](double y) { return (y + 1.0) / 2.0; };
  hi.image = Interval{0.0, 1.0};

  return std::make_shared<PiecewiseMap>("doubling", Interval{0.0, 1.0},
                                        std::vector<Branch>{lo, hi});
}

std::shared_ptr<IntervalMap> make_tent(double slope) {
  if (!(slope > 1.0) || slope > 2.0 + kEndpointTol)
    fail(Cond::BadConfig, "tent slope must lie in (1, 2], got " + fmt_g17(slope));
  Branch lo;
  lo.domain = Interval{0.0, 0.5};
  lo.dir = +1;
  lo.forward = [slope](double x) { return slope * x; };
  lo.derivative = [slope](double) { return slope; };
  lo.inverse = [slope](double y) { return y / slope; };
  lo.image = Interval{0.0, slope / 2.0};

  Branch hi;
  hi.domain = Interval{0.5, 1.0};
  hi.dir = -1;
  hi.forward = [slope](double x) { return slope * (1.0 - x); };
  hi.derivative = [slope](double) { return -slope; };
  hi.inverse = [slope](double y) { return 1.0 - y / slope; };
  hi.image = Interval{0.0, slope / 2.0};

  return std::make_shared<PiecewiseMap>(
      "tent", Interval{0.0, 1.0}, std::vector<Branch>{lo, hi},
      std::vector<std::pair<std::string, double>>{{"slope", slope}});
}

std::shared_ptr<UnimodalMap> make_quadratic(double a) { return std::make_shared<UnimodalMap>(a); }

std::string map_to_json(const IntervalMap& map) {
  nlohmann::json j;
  j["kind"] = map.kind();
  j["params"] = nlohmann::json::object();
  if (const auto* u = dynamic_cast<const UnimodalMap*>(&map)) {
    j["params"]["a"] = u->a();
  } else if (const auto* p = dynamic_cast<const PiecewiseMap*>(&map)) {
    for (const auto& [k, v] : p->params()) j["params"][k] = v;
  }
  j["branches"] = nlohmann::json::array();
  for (const auto& b : map.branches()) {
    j["branches"].push_back({{"lo", b.domain.lo}, {"hi", b.domain.hi}, {"dir", b.dir}});
  }
  return j.dump(2);
}

std::shared_ptr<IntervalMap> map_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Cond::BadConfig, std::string("map descriptor is not valid JSON: ") + e.what());
  }
  if (!j.contains("kind") || !j["kind"].is_string())
    fail(Cond::BadConfig, "map descriptor missing \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  const auto params = j.value("params", nlohmann::json::object());
  if (kind == "doubling") return make_doubling();
  if (kind == "tent") {
    if (!params.contains("slope")) fail(Cond::BadConfig, "tent descriptor missing slope");
    return make_tent(params["slope"].get<double>());
  }
  if (kind == "quadratic") {
    if (!params.contains("a")) fail(Cond::BadConfig, "quadratic descriptor missing a");
    return make_quadratic(params["a"].get<double>());
  }
  fail(Cond::BadConfig, "unknown map kind \"" + kind + "\"");
}

double eval(const IntervalMap& map, double x, int n) {
  if (n < 0) fail(Cond::BadConfig, "iterate count must be >= 0");
  double y = x;
  for (int k = 0; k < n; ++k) y = map.apply(y);
  return y;
}

std::vector<double> log_deriv_orbit(const IntervalMap& map, double x, int n) {
  if (n < 0) fail(Cond::BadConfig, "iterate count must be >= 0");
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n));
  double y = x;
  for (int k = 0; k < n; ++k) {
    double d = map.derivative(y);
    if (std::fabs(d) < kCriticalTol)
      fail(Cond::NearCritical, "orbit step " + std::to_string(k) +
                                   " has |df|=" + fmt_g17(std::fabs(d)) + " at x=" + fmt_g17(y));
    out.push_back(std::log(std::fabs(d)));
    y = map.apply(y);
  }
  return out;
}

Interval inverse_branch_compose(const IntervalMap& map, const std::vector<int>& word,
                                Interval target) {
  if (!target.valid()) fail(Cond::BadConfig, "target interval is degenerate");
  Interval cur = target;
  for (size_t k = word.size(); k-- > 0;) {
    int s = word[k];
    if (s < 0 || s >= static_cast<int>(map.branches().size()))
      fail(Cond::BadConfig, "word symbol " + std::to_string(s) + " has no branch");
    const Branch& b = map.branches()[static_cast<size_t>(s)];
    Interval clipped = intersect(cur, b.image);
    if (!clipped.valid() || !(clipped.length() > 0))
      fail(Cond::EmptyPreimage, "target misses image of branch " + std::to_string(s) +
                                    " at word position " + std::to_string(k));
    cur = sorted_interval(b.inverse(clipped.lo), b.inverse(clipped.hi));
  }
  return cur;
}

}  // namespace thermoscheme
