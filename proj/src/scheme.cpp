#include "thermoscheme/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "json.hpp"

namespace thermoscheme {

namespace {

constexpr double kEpsH1 = 1e-9;

double log_dF_along_word(const IntervalMap& m, const std::vector<int>& word, double x) {
  double y = x;
  double acc = 0;
  for (int b : word) {
    const Branch& br = m.branches()[static_cast<size_t>(b)];
    acc += std::log(std::fabs(br.derivative(y)));
    y = br.forward(y);
  }
  return acc;
}

double forward_along_word(const IntervalMap& m, const std::vector<int>& word, double x) {
  double y = x;
  for (int b : word) y = m.branches()[static_cast<size_t>(b)].forward(y);
  return y;
}

Interval forward_interval(const IntervalMap& m, const std::vector<int>& word, Interval I) {
  double a = I.lo, b = I.hi;
  for (int s : word) {
    const Branch& br = m.branches()[static_cast<size_t>(s)];
    a = br.forward(a);
    b = br.forward(b);
    if (a > b) std::swap(a, b);
  }
  return Interval{a, b};
}

std::vector<int> concat_branch_word(const InducingScheme& s, const std::vector<int>& word) {
  std::vector<int> out;
  for (int sym : word) {
    if (sym < 0 || sym >= s.alphabet())
      fail(Cond::BadConfig, "symbol " + std::to_string(sym) + " outside alphabet");
    const auto& w = s.elements[static_cast<size_t>(sym)].branch_word;
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

// Deep cylinders shrink below the double grid near 1, so interval arithmetic
// reports them empty.  Pulling a single interior point backwards keeps full
// precision at any depth.
double pullback_point(const IntervalMap& m, const std::vector<int>& word, double y) {
  for (size_t k = word.size(); k-- > 0;) {
    const Branch& b = m.branches()[static_cast<size_t>(word[k])];
    y = b.inverse(y);
  }
  return y;
}

double pullback_log_width(const IntervalMap& m, const std::vector<int>& word, double y,
                          double logw) {
  for (size_t k = word.size(); k-- > 0;) {
    const Branch& b = m.branches()[static_cast<size_t>(word[k])];
    y = b.inverse(y);
    double d = std::fabs(b.derivative(y));
    if (d < kCriticalTol)
      fail(Cond::NearCritical, "cylinder width pullback passes a near-critical point");
    logw -= std::log(d);
  }
  return logw;
}

}  // namespace

int InducingScheme::max_tau() const {
  int m = 0;
  for (const auto& c : classes) m = std::max(m, c.tau);
  for (const auto& e : elements) m = std::max(m, e.tau);
  return m;
}

std::uint64_t InducingScheme::S_of(int n) const {
  std::uint64_t total = 0;
  for (const auto& c : classes)
    if (c.tau == n) total += c.count;
  return total;
}

double InducingScheme::total_len() const {
  double t = 0;
  for (const auto& c : classes) t += c.total_len;
  return t;
}

int InducingScheme::find_element(double x) const {
  if (by_lo_.empty()) return -1;
  auto it = std::upper_bound(by_lo_.begin(), by_lo_.end(), x, [this](double v, int idx) {
    return v < elements[static_cast<size_t>(idx)].J.lo;
  });
  if (it == by_lo_.begin()) return -1;
  int idx = *(it - 1);
  const Interval& J = elements[static_cast<size_t>(idx)].J;
  return J.contains_oc(x) ? idx : -1;
}

void InducingScheme::finalize() {
  std::sort(elements.begin(), elements.end(), [](const BasicElement& a, const BasicElement& b) {
    if (a.tau != b.tau) return a.tau < b.tau;
    return a.J.lo < b.J.lo;
  });
  for (size_t i = 0; i < elements.size(); ++i) elements[i].symbol = static_cast<int>(i);
  by_lo_.resize(elements.size());
  for (size_t i = 0; i < elements.size(); ++i) by_lo_[i] = static_cast<int>(i);
  std::sort(by_lo_.begin(), by_lo_.end(), [this](int a, int b) {
    return elements[static_cast<size_t>(a)].J.lo < elements[static_cast<size_t>(b)].J.lo;
  });
  for (size_t i = 1; i < by_lo_.size(); ++i) {
    const Interval& prev = elements[static_cast<size_t>(by_lo_[i - 1])].J;
    const Interval& cur = elements[static_cast<size_t>(by_lo_[i])].J;
    if (cur.lo < prev.hi - 1e-12)
      fail(Cond::BadConfig, "element intervals overlap near x=" + fmt_g17(cur.lo));
  }
  std::sort(classes.begin(), classes.end(),
            [](const LevelClass& a, const LevelClass& b) { return a.tau < b.tau; });
  double sum = 0;
  for (const auto& e : elements) sum += e.J.length();
  if (!elements.empty()) {
    double hull = elements[static_cast<size_t>(by_lo_.front())].J.lo;
    double hullhi = 0;
    for (const auto& e : elements) hullhi = std::max(hullhi, e.J.hi);
    if (W.length() == 0) W = Interval{hull, hullhi};
    if (sum > W.length() + 1e-9)
      fail(Cond::BadConfig, "element lengths exceed the inducing domain");
  }
}

InducingScheme build_doubling_scheme(const std::string& variant, int n_max) {
  bool refined;
  if (variant == "plain" || variant == "doubling-plain")
    refined = false;
  else if (variant == "refined" || variant == "doubling-refined")
    refined = true;
  else
    fail(Cond::BadConfig, "unknown doubling variant \"" + variant + "\"");
  if (n_max < 1) fail(Cond::BadConfig, "n_max must be >= 1");
  if (!refined && n_max > 60) fail(Cond::BadConfig, "plain variant caps n_max at 60");
  if (refined && n_max > 5)
    fail(Cond::BadConfig, "refined variant caps n_max at 5 (element counts are 2^(2^n))");

  InducingScheme s;
  s.map = make_doubling();
  s.variant = refined ? "doubling-refined" : "doubling-plain";
  s.base = Interval{0.0, 1.0};
  s.W = Interval{std::ldexp(1.0, -(n_max + 1)), 1.0};
  s.truncation = n_max;
  s.params = {{"n_max", static_cast<double>(n_max)}};
  s.tau_note =
      "tau is the exact iterate count with f^tau(J) = base; for the dyadic levels this gives "
      "tau(I_n) = n+1 (plain) and tau = 2^n+n+1 (refined), one more than the level index "
      "convention that counts only the passage steps.";

  const std::size_t materialize_cap = 70000;
  std::size_t materialized = 0;
  for (int n = 0; n <= n_max; ++n) {
    double level_lo = std::ldexp(1.0, -(n + 1));
    if (!refined) {
      BasicElement e;
      e.J = Interval{level_lo, std::ldexp(1.0, -n)};
      e.tau = n + 1;
      e.level = n;
      e.branch_word.assign(static_cast<size_t>(n), 0);
      e.branch_word.push_back(1);
      e.log_dF_inf = e.log_dF_sup = e.tau * std::log(2.0);
      LevelClass c;
      c.level = n;
      c.tau = n + 1;
      c.count = 1;
      c.piece_len = e.J.length();
      c.total_len = c.piece_len;
      c.log_dF = (n + 1) * std::log(2.0);
      s.classes.push_back(c);
      s.elements.push_back(std::move(e));
      ++materialized;
      continue;
    }
    int bits = 1 << n;
    int tau = bits + n + 1;
    std::uint64_t count = (n >= 6) ? 0 : (std::uint64_t{1} << bits);
    double piece = std::ldexp(1.0, -tau);
    LevelClass c;
    c.level = n;
    c.tau = tau;
    c.count = count;
    c.piece_len = piece;
    c.total_len = std::ldexp(1.0, -(n + 1));
    c.log_dF = tau * std::log(2.0);
    c.materialized = materialized + count <= materialize_cap && count > 0;
    s.classes.push_back(c);
    if (!c.materialized) {
      s.fully_materialized = false;
      continue;
    }
    std::vector<int> prefix(static_cast<size_t>(n), 0);
    prefix.push_back(1);
    for (std::uint64_t j = 0; j < count; ++j) {
      BasicElement e;
      e.J = Interval{level_lo + static_cast<double>(j) * piece,
                     level_lo + static_cast<double>(j + 1) * piece};
      e.tau = tau;
      e.level = n;
      e.branch_word = prefix;
      for (int b = bits - 1; b >= 0; --b) e.branch_word.push_back((j >> b) & 1 ? 1 : 0);
      e.log_dF_inf = e.log_dF_sup = tau * std::log(2.0);
      s.elements.push_back(std::move(e));
    }
    materialized += count;
  }
  s.finalize();
  return s;
}

InducingScheme build_first_return_scheme(std::shared_ptr<const IntervalMap> map, Interval base,
                                         int depth) {
  if (!map) fail(Cond::BadConfig, "map required");
  if (!base.valid() || !(base.length() > 0)) fail(Cond::BadConfig, "base interval degenerate");
  if (base.lo < map->ambient().lo - kEndpointTol || base.hi > map->ambient().hi + kEndpointTol)
    fail(Cond::BadConfig, "base leaves the ambient interval");
  if (depth < 1 || depth > 40) fail(Cond::BadConfig, "depth must lie in [1, 40]");

  InducingScheme s;
  s.map = map;
  s.variant = "first-return";
  s.base = base;
  s.truncation = depth;
  s.params = {{"depth", static_cast<double>(depth)}};
  s.tau_note = "tau is the exact first-return iterate count with f^tau(J) = base.";

  struct State {
    std::vector<int> word;
    Interval img;
  };
  std::deque<State> queue;
  auto push_children = [&](const State& st) {
    if (static_cast<int>(st.word.size()) >= depth) {
      Interval pre = inverse_branch_compose(*map, st.word, st.img);
      s.unresolved_len += pre.length();
      return;
    }
    for (size_t b = 0; b < map->branches().size(); ++b) {
      const Branch& br = map->branches()[b];
      Interval piece = intersect(st.img, br.domain);
      if (!piece.valid() || piece.length() <= kEndpointTol) continue;
      State child;
      child.word = st.word;
      child.word.push_back(static_cast<int>(b));
      double u = br.forward(piece.lo), v = br.forward(piece.hi);
      child.img = u <= v ? Interval{u, v} : Interval{v, u};
      queue.push_back(std::move(child));
    }
  };

  push_children(State{{}, base});
  std::size_t pops = 0;
  while (!queue.empty()) {
    if (++pops > 500000) fail(Cond::CapExceeded, "first-return exploration exceeded state cap");
    State st = std::move(queue.front());
    queue.pop_front();
    Interval overlap = intersect(st.img, base);
    bool returns = overlap.valid() && overlap.length() > kEndpointTol;
    if (!returns) {
      push_children(st);
      continue;
    }
    bool covers = st.img.lo <= base.lo + kEndpointTol && st.img.hi >= base.hi - kEndpointTol;
    if (!covers)
      fail(Cond::NotMarkov,
           "partial return image (" + fmt_g17(st.img.lo) + ", " + fmt_g17(st.img.hi) +
               ") does not cover the base; base is not cylinder-aligned");
    BasicElement e;
    e.J = inverse_branch_compose(*map, st.word, base);
    e.tau = static_cast<int>(st.word.size());
    e.level = e.tau;
    e.branch_word = st.word;
    double xs[3] = {e.J.lo, e.J.mid(), e.J.hi};
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double x : xs) {
      double v = log_dF_along_word(*map, st.word, x);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    e.log_dF_inf = lo;
    e.log_dF_sup = hi;
    s.elements.push_back(std::move(e));
    if (s.elements.size() > 2000000) fail(Cond::CapExceeded, "element cap exceeded");
    Interval left{st.img.lo, base.lo};
    Interval right{base.hi, st.img.hi};
    for (Interval rem : {left, right}) {
      if (rem.length() > kEndpointTol) push_children(State{st.word, rem});
    }
  }

  std::map<int, std::vector<double>> lens;
  for (const auto& e : s.elements) lens[e.tau].push_back(e.J.length());
  for (auto& [tau, v] : lens) {
    LevelClass c;
    c.level = tau;
    c.tau = tau;
    c.count = v.size();
    double tot = 0, mn = v[0], mx = v[0];
    for (double L : v) {
      tot += L;
      mn = std::min(mn, L);
      mx = std::max(mx, L);
    }
    c.total_len = tot;
    c.piece_len = tot / static_cast<double>(v.size());
    c.uniform = (mx - mn) <= 1e-12 * std::max(1.0, mx);
    double ld = 0;
    for (const auto& e : s.elements)
      if (e.tau == tau) ld = std::max(ld, e.log_dF_sup);
    c.log_dF = ld;
    s.classes.push_back(c);
  }
  s.finalize();
  return s;
}

InducingScheme build_unimodal_scheme(std::shared_ptr<const UnimodalMap> map, int tau_max) {
  if (!map) fail(Cond::BadConfig, "map required");
  if (tau_max < 1 || tau_max > 24) fail(Cond::BadConfig, "tau_max must lie in [1, 24]");
  double alpha = map->alpha();
  Interval A{-alpha, alpha};
  if (!(A.length() > 0)) fail(Cond::Degenerate, "the interval A = (-alpha, alpha) is empty");
  double alpha1 = -std::sqrt((1.0 + alpha) / map->a());
  Interval Ahat{alpha1, -alpha1};

  InducingScheme s;
  s.map = map;
  s.variant = "unimodal";
  s.base = A;
  s.base_A = A;
  s.truncation = tau_max;
  s.params = {{"a", map->a()}, {"tau_max", static_cast<double>(tau_max)}};
  s.tau_note = "tau is the exact iterate count with f^tau(J) = A for each maximal regular piece.";

  struct Lap {
    std::vector<int> word;
    Interval img;
  };
  std::vector<Lap> laps;
  for (size_t b = 0; b < map->branches().size(); ++b) {
    const Branch& br = map->branches()[b];
    double u = br.forward(br.domain.lo), v = br.forward(br.domain.hi);
    laps.push_back({{static_cast<int>(b)}, u <= v ? Interval{u, v} : Interval{v, u}});
  }

  std::vector<BasicElement> kept;
  for (int n = 1; n <= tau_max; ++n) {
    for (const auto& lap : laps) {
      if (!lap.img.contains(Ahat, kGapTol)) continue;
      Interval J = inverse_branch_compose(*map, lap.word, A);
      if (!(J.lo > A.lo + kGapTol) || !(J.hi < A.hi - kGapTol)) continue;
      bool blocked = false;
      for (const auto& k : kept) {
        Interval ov = intersect(J, k.J);
        if (ov.valid() && ov.length() > 1e-12) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      BasicElement e;
      e.J = J;
      e.tau = n;
      e.level = n;
      e.branch_word = lap.word;
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int i = 0; i <= 4; ++i) {
        double x = J.lo + J.length() * i / 4.0;
        double v = log_dF_along_word(*map, lap.word, x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      e.log_dF_inf = lo;
      e.log_dF_sup = hi;
      kept.push_back(std::move(e));
    }
    if (n == tau_max) break;
    std::vector<Lap> next;
    next.reserve(laps.size() * 2);
    for (const auto& lap : laps) {
      std::vector<Interval> pieces;
      if (lap.img.lo < -kEndpointTol && lap.img.hi > kEndpointTol) {
        pieces.push_back(Interval{lap.img.lo, 0.0});
        pieces.push_back(Interval{0.0, lap.img.hi});
      } else {
        pieces.push_back(lap.img);
      }
      for (const Interval& p : pieces) {
        if (p.length() <= 1e-14) continue;
        int b = p.mid() <= 0 ? 0 : 1;
        const Branch& br = map->branches()[static_cast<size_t>(b)];
        double u = br.forward(p.lo), v = br.forward(p.hi);
        Lap child;
        child.word = lap.word;
        child.word.push_back(b);
        child.img = u <= v ? Interval{u, v} : Interval{v, u};
        next.push_back(std::move(child));
      }
    }
    laps = std::move(next);
    if (laps.size() > 2000000) fail(Cond::CapExceeded, "lap cap exceeded");
  }

  s.elements = std::move(kept);
  std::map<int, std::vector<double>> lens;
  for (const auto& e : s.elements) lens[e.tau].push_back(e.J.length());
  for (auto& [tau, v] : lens) {
    LevelClass c;
    c.level = tau;
    c.tau = tau;
    c.count = v.size();
    double tot = 0, mn = v[0], mx = v[0];
    for (double L : v) {
      tot += L;
      mn = std::min(mn, L);
      mx = std::max(mx, L);
    }
    c.total_len = tot;
    c.piece_len = tot / static_cast<double>(v.size());
    c.uniform = (mx - mn) <= 1e-12 * std::max(1.0, mx);
    double ld = -std::numeric_limits<double>::infinity();
    for (const auto& e : s.elements)
      if (e.tau == tau) ld = std::max(ld, e.log_dF_sup);
    c.log_dF = ld;
    s.classes.push_back(c);
  }
  s.finalize();
  return s;
}

std::pair<double, int> induced_map(const InducingScheme& s, double x) {
  int idx = s.find_element(x);
  if (idx < 0)
    fail(Cond::NotInW, "x=" + fmt_g17(x) + " lies in no basic element (tau(x)=0 case)");
  const auto& e = s.elements[static_cast<size_t>(idx)];
  return {forward_along_word(*s.map, e.branch_word, x), idx};
}

double induced_log_dF(const InducingScheme& s, double x) {
  int idx = s.find_element(x);
  if (idx < 0) fail(Cond::NotInW, "x=" + fmt_g17(x) + " lies in no basic element");
  return log_dF_along_word(*s.map, s.elements[static_cast<size_t>(idx)].branch_word, x);
}

Interval cylinder_interval(const InducingScheme& s, const std::vector<int>& word) {
  if (word.empty()) fail(Cond::BadConfig, "empty word");
  return inverse_branch_compose(*s.map, concat_branch_word(s, word), s.base);
}

double code_word(const InducingScheme& s, const std::vector<int>& word, bool periodic) {
  if (word.empty()) fail(Cond::BadConfig, "empty word");
  std::vector<int> branch = concat_branch_word(s, word);
  double x = pullback_point(*s.map, branch, s.base.mid());
  if (!periodic) return x;
  for (int rep = 0; rep < 4000; ++rep) {
    double nx = pullback_point(*s.map, branch, x);
    double step = std::fabs(nx - x);
    x = nx;
    if (step < kCodeTol) return x;
  }
  fail(Cond::NoConvergence,
       "periodic word iteration failed to contract below " + fmt_g17(kCodeTol) +
           " within the cap",
       "(H2)");
}

SchemeReport verify_scheme(const InducingScheme& s, int sample_depth, std::uint64_t seed) {
  if (s.elements.empty()) fail(Cond::BadConfig, "scheme has no materialized elements");
  if (sample_depth < 1) fail(Cond::BadConfig, "sample_depth must be >= 1");
  SchemeReport rep;

  double worst_h1 = 0;
  for (const auto& e : s.elements) {
    Interval img = forward_interval(*s.map, e.branch_word, e.J);
    double defect = std::max(std::fabs(img.lo - s.base.lo), std::fabs(img.hi - s.base.hi));
    worst_h1 = std::max(worst_h1, defect);
  }
  rep.h1_max_defect = worst_h1;
  rep.h1_pass = worst_h1 < kEpsH1;

  for (const auto& c : s.classes) rep.S_counts[c.tau] += c.count;

  std::vector<double> taus, log_tails;
  {
    std::vector<std::pair<int, double>> per_tau;
    for (const auto& [tau, cnt] : rep.S_counts) {
      double tot = 0;
      for (const auto& c : s.classes)
        if (c.tau == tau) tot += c.total_len;
      per_tau.push_back({tau, tot});
    }
    double tail = 0;
    std::vector<std::pair<int, double>> tails;
    for (auto it = per_tau.rbegin(); it != per_tau.rend(); ++it) {
      tail += it->second;
      tails.push_back({it->first, tail});
    }
    std::reverse(tails.begin(), tails.end());
    std::vector<std::pair<int, double>> window = tails;
    if (tails.size() >= 5) {
      double cutoff = tails.front().first + 0.4 * (tails.back().first - tails.front().first);
      std::vector<std::pair<int, double>> lead;
      for (const auto& p : tails)
        if (p.first <= cutoff + 1e-9) lead.push_back(p);
      if (lead.size() >= 5) window = std::move(lead);
    }
    for (const auto& [n, T] : window) {
      taus.push_back(n);
      log_tails.push_back(std::log(T));
    }
  }
  LinFit tail_fit = fit_linear(taus, log_tails);
  if (tail_fit.ok()) {
    rep.lambda1 = std::exp(-tail_fit.slope);
    rep.c1 = std::exp(tail_fit.intercept);
    rep.lambda1_resid = tail_fit.max_abs_residual;
    rep.tail_pass = rep.lambda1 > 1.0 + 1e-12 && rep.lambda1_resid < 0.1;
    if (rep.lambda1 <= 1.0)
      fail(Cond::TailNotExponential,
           "fitted tail rate lambda1=" + fmt_g17(rep.lambda1) + " is not > 1", "(H4)");
  } else {
    rep.warnings.push_back("tail fit needs at least two distinct tau values");
    rep.lambda1 = std::exp(s.elements.front().log_dF_inf / s.elements.front().tau);
    rep.c1 = 1.0;
    rep.tail_pass = false;
  }

  {
    std::vector<double> xs, ys;
    for (const auto& [tau, cnt] : rep.S_counts) {
      double mx = -std::numeric_limits<double>::infinity();
      for (const auto& c : s.classes)
        if (c.tau == tau) mx = std::max(mx, c.log_dF);
      xs.push_back(tau);
      ys.push_back(mx);
    }
    LinFit dfit = fit_linear(xs, ys);
    rep.lambda3 = dfit.ok() ? std::exp(dfit.slope) : std::exp(ys[0] / xs[0]);
    double log_l3 = std::log(rep.lambda3);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& e : s.elements) {
      lo = std::min(lo, e.log_dF_inf - e.tau * log_l3);
      hi = std::max(hi, e.log_dF_sup - e.tau * log_l3);
    }
    for (const auto& c : s.classes)
      if (!c.materialized) {
        lo = std::min(lo, c.log_dF - c.tau * log_l3);
        hi = std::max(hi, c.log_dF - c.tau * log_l3);
      }
    rep.c3 = std::exp(lo);
    rep.c4 = std::exp(hi);
    if (rep.lambda1 > rep.lambda3 * (1 + 1e-9))
      rep.warnings.push_back("fitted lambda1 exceeds lambda3");
  }

  {
    std::mt19937_64 rng(derive_seed(seed, 1));
    std::uniform_int_distribution<int> sym(0, s.alphabet() - 1);
    double log_bound =
        -0.9 * sample_depth * std::log(rep.lambda1) + std::log(s.base.length());
    double worst = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<int> w(static_cast<size_t>(sample_depth));
      for (auto& v : w) v = sym(rng);
      double loglen = pullback_log_width(*s.map, concat_branch_word(s, w), s.base.mid(),
                                         std::log(s.base.length()));
      worst = std::max(worst, loglen - log_bound);
    }
    rep.h2_worst_ratio = std::exp(worst);
    rep.h2_pass = worst < 0;
  }

  {
    std::mt19937_64 rng(derive_seed(seed, 2));
    std::uniform_int_distribution<int> sym(0, s.alphabet() - 1);
    int dmax = std::min(sample_depth, 6);
    std::vector<double> ns, defects;
    double overall = 0;
    for (int n = 1; n <= dmax; ++n) {
      double worst = 0;
      for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> w(static_cast<size_t>(n));
        for (auto& v : w) v = sym(rng);
        std::vector<int> branch = concat_branch_word(s, w);
        double x = pullback_point(*s.map, branch, s.base.lo + s.base.length() * 0.25);
        double y = pullback_point(*s.map, branch, s.base.lo + s.base.length() * 0.75);
        for (int i = 0; i < n; ++i) {
          const auto& e = s.elements[static_cast<size_t>(w[static_cast<size_t>(i)])];
          double lx = log_dF_along_word(*s.map, e.branch_word, x);
          double ly = log_dF_along_word(*s.map, e.branch_word, y);
          worst = std::max(worst, std::fabs(std::expm1(lx - ly)));
          x = forward_along_word(*s.map, e.branch_word, x);
          y = forward_along_word(*s.map, e.branch_word, y);
        }
      }
      overall = std::max(overall, worst);
      if (worst > 1e-14) {
        ns.push_back(n);
        defects.push_back(std::log(worst));
      }
    }
    rep.distortion_max = overall;
    if (ns.size() < 2) {
      rep.c2 = 0;
      rep.lambda2 = std::numeric_limits<double>::infinity();
      rep.distortion_pass = true;
    } else {
      LinFit dfit = fit_linear(ns, defects);
      rep.lambda2 = std::exp(-dfit.slope);
      rep.c2 = std::exp(dfit.intercept);
      rep.distortion_pass = rep.lambda2 > 1.0 && dfit.max_abs_residual < 0.5;
      if (overall > 10.0 && rep.lambda2 <= 1.0)
        fail(Cond::DistortionUnbounded,
             "sampled distortion defects grow with depth (max " + fmt_g17(overall) + ")",
             "(H5)");
    }
  }

  {
    std::vector<double> xs, ys;
    for (const auto& [tau, cnt] : rep.S_counts) {
      xs.push_back(tau);
      ys.push_back(std::log(static_cast<double>(cnt)));
    }
    LinFit gfit = fit_linear(xs, ys);
    if (gfit.ok()) {
      rep.gamma = std::exp(std::max(0.0, gfit.slope));
      rep.gamma_d = std::exp(gfit.intercept + gfit.max_abs_residual);
      rep.gamma_resid = gfit.max_abs_residual;
    }
  }

  if (s.unresolved_len > 0)
    rep.warnings.push_back("unresolved base mass " + fmt_g17(s.unresolved_len) +
                           " at the depth cap");
  if (!s.fully_materialized)
    rep.warnings.push_back("deepest levels carried as class summaries only");
  return rep;
}

int compute_N0(const UnimodalMap& map, int cap) {
  if (cap < 1) fail(Cond::BadConfig, "iterate cap must be >= 1");
  double alpha = map.alpha();
  double v = 0.0;
  for (int n = 1; n <= cap; ++n) {
    v = map.apply(v);
    if (std::fabs(v) < alpha) return n;
  }
  fail(Cond::CapExceeded,
       "critical orbit stayed outside (-alpha, alpha) for " + std::to_string(cap) + " iterates");
}

StrongRegularReport strongly_regular_check(const UnimodalMap& map, const InducingScheme& s,
                                           int k_max, int M_bar, double rho) {
  if (!(rho > 0) || !(rho < 1)) fail(Cond::BadConfig, "rho must lie in (0,1)");
  if (k_max < 0) fail(Cond::BadConfig, "k_max must be >= 0");
  StrongRegularReport rep;
  rep.M_bar = M_bar;
  rep.rho = rho;
  if (k_max == 0) {
    rep.pass = true;
    rep.note = "k_max=0: empty conjunction holds vacuously";
    return rep;
  }
  int N0 = compute_N0(map, 100000);
  rep.N0 = N0;
  double lo = std::pow(std::log(static_cast<double>(N0)), 2.0);
  double hi = 2.0 * N0 / 3.0;
  if (!(lo < M_bar) || !(M_bar < hi))
    fail(Cond::BadConfig, "M_bar=" + std::to_string(M_bar) + " outside the window (" +
                              fmt_g17(lo) + ", " + fmt_g17(hi) + ") for N0=" + std::to_string(N0));

  auto find_closed = [&](double x) -> int {
    for (const auto& e : s.elements)
      if (x >= e.J.lo - kEndpointTol && x <= e.J.hi + kEndpointTol) return e.symbol;
    return -1;
  };

  double z = eval(map, 0.0, N0);
  double budget = 0;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  rep.pass = true;
  for (int k = 1; k <= k_max; ++k) {
    int idx = find_closed(z);
    if (idx < 0)
      fail(Cond::OrbitEscapes, "induced orbit of the critical point lands in no regular interval "
                               "at step " +
                                   std::to_string(k) + " (x=" + fmt_g17(z) + ")");
    const auto& e = s.elements[static_cast<size_t>(idx)];
    rep.tau_seq.push_back({k, e.tau});
    if (e.tau >= M_bar) budget += e.tau;
    double margin = rho * k - budget;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (!(budget < rho * k)) {
      rep.pass = false;
      rep.first_fail_k = k;
      break;
    }
    z = forward_along_word(map, e.branch_word, z);
  }
  if (s.max_tau() < M_bar)
    rep.note = "no inducing time reaches M_bar at this truncation; the budget condition is "
               "vacuous here";
  return rep;
}

std::vector<TowerSlice> tower_slices(const InducingScheme& s, std::size_t max_slices) {
  std::vector<TowerSlice> out;
  for (const auto& e : s.elements) {
    Interval I = e.J;
    out.push_back({e.symbol, 0, I});
    for (int k = 1; k < e.tau; ++k) {
      const Branch& br = s.map->branches()[static_cast<size_t>(e.branch_word[static_cast<size_t>(k - 1)])];
      double u = br.forward(I.lo), v = br.forward(I.hi);
      I = u <= v ? Interval{u, v} : Interval{v, u};
      out.push_back({e.symbol, k, I});
    }
    if (out.size() > max_slices) fail(Cond::CapExceeded, "tower slice cap exceeded");
  }
  return out;
}

std::string scheme_to_json(const InducingScheme& s) {
  nlohmann::json j;
  j["map"] = nlohmann::json::parse(map_to_json(*s.map));
  j["W"] = {{"lo", s.W.lo}, {"hi", s.W.hi}};
  j["elements"] = nlohmann::json::array();
  for (const auto& e : s.elements) {
    j["elements"].push_back({{"sym", e.symbol},
                             {"lo", e.J.lo},
                             {"hi", e.J.hi},
                             {"tau", e.tau},
                             {"word", e.branch_word},
                             {"level", e.level},
                             {"log_dF_inf", e.log_dF_inf},
                             {"log_dF_sup", e.log_dF_sup}});
  }
  nlohmann::json meta;
  meta["variant"] = s.variant;
  meta["tau_convention"] = "constructive";
  meta["tau_note"] = s.tau_note;
  meta["truncation"] = s.truncation;
  meta["base"] = {{"lo", s.base.lo}, {"hi", s.base.hi}};
  if (s.base_A) meta["base_A"] = {{"lo", s.base_A->lo}, {"hi", s.base_A->hi}};
  meta["fully_materialized"] = s.fully_materialized;
  meta["unresolved_len"] = s.unresolved_len;
  for (const auto& [k, v] : s.params) meta["params"][k] = v;
  meta["classes"] = nlohmann::json::array();
  for (const auto& c : s.classes) {
    meta["classes"].push_back({{"level", c.level},
                               {"tau", c.tau},
                               {"count", c.count},
                               {"piece_len", c.piece_len},
                               {"total_len", c.total_len},
                               {"log_dF", c.log_dF},
                               {"uniform", c.uniform},
                               {"materialized", c.materialized}});
  }
  j["meta"] = meta;
  return j.dump(2);
}

InducingScheme scheme_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Cond::BadConfig, std::string("scheme file is not valid JSON: ") + e.what());
  }
  if (!j.contains("map") || !j.contains("elements") || !j.contains("meta"))
    fail(Cond::BadConfig, "scheme file missing map/elements/meta");
  InducingScheme s;
  s.map = map_from_json(j["map"].dump());
  s.W = Interval{j["W"]["lo"].get<double>(), j["W"]["hi"].get<double>()};
  const auto& meta = j["meta"];
  s.variant = meta.value("variant", std::string("unknown"));
  s.tau_note = meta.value("tau_note", std::string());
  s.truncation = meta.value("truncation", 0);
  s.base = Interval{meta["base"]["lo"].get<double>(), meta["base"]["hi"].get<double>()};
  if (meta.contains("base_A"))
    s.base_A = Interval{meta["base_A"]["lo"].get<double>(), meta["base_A"]["hi"].get<double>()};
  s.fully_materialized = meta.value("fully_materialized", true);
  s.unresolved_len = meta.value("unresolved_len", 0.0);
  if (meta.contains("params"))
    for (auto it = meta["params"].begin(); it != meta["params"].end(); ++it)
      s.params.push_back({it.key(), it.value().get<double>()});
  for (const auto& ej : j["elements"]) {
    BasicElement e;
    e.symbol = ej["sym"].get<int>();
    e.J = Interval{ej["lo"].get<double>(), ej["hi"].get<double>()};
    e.tau = ej["tau"].get<int>();
    e.branch_word = ej["word"].get<std::vector<int>>();
    e.level = ej.value("level", -1);
    e.log_dF_inf = ej.value("log_dF_inf", 0.0);
    e.log_dF_sup = ej.value("log_dF_sup", 0.0);
    if (e.tau < 1 || static_cast<int>(e.branch_word.size()) != e.tau)
      fail(Cond::BadConfig, "element branch word does not realize its tau");
    s.elements.push_back(std::move(e));
  }
  if (meta.contains("classes")) {
    for (const auto& cj : meta["classes"]) {
      LevelClass c;
      c.level = cj["level"].get<int>();
      c.tau = cj["tau"].get<int>();
      c.count = cj["count"].get<std::uint64_t>();
      c.piece_len = cj["piece_len"].get<double>();
      c.total_len = cj["total_len"].get<double>();
      c.log_dF = cj["log_dF"].get<double>();
      c.uniform = cj.value("uniform", true);
      c.materialized = cj.value("materialized", true);
      s.classes.push_back(c);
    }
  }
  s.finalize();
  std::size_t step = std::max<std::size_t>(1, s.elements.size() / 200);
  for (std::size_t i = 0; i < s.elements.size(); i += step) {
    const auto& e = s.elements[i];
    Interval img = forward_interval(*s.map, e.branch_word, e.J);
    double defect = std::max(std::fabs(img.lo - s.base.lo), std::fabs(img.hi - s.base.hi));
    if (defect > 1e-6)
      fail(Cond::BadConfig, "scheme file failed revalidation: element " +
                                std::to_string(e.symbol) + " has endpoint defect " +
                                fmt_g17(defect));
  }
  return s;
}

}  // namespace thermoscheme
