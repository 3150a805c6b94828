#include "thermoscheme/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace thermoscheme {

namespace {

constexpr double kRootTol = 1e-9;
constexpr double kBisectWidth = 1e-13;
constexpr int kBisectCap = 240;
constexpr double kTailRatio = 0.9;     // block decay threshold for the (P2)/(P3) tests
constexpr double kDivergeRatio = 0.7;  // non-decay threshold for the Q scan
constexpr int kQuadPoints = 5;
constexpr double kInf = std::numeric_limits<double>::infinity();

double phi_point(const PotentialSpec& base, const IntervalMap& m, double x) {
  if (base.tag == "constant") return base.c;
  if (base.tag == "phi_t") {
    double d = std::fabs(m.derivative(x));
    if (d < kCriticalTol) fail(Cond::NearCritical, "phi_t evaluated at a near-critical point");
    return -base.t * std::log(d);
  }
  return base.custom(x);
}

struct TauBlocks {
  std::vector<int> tau;
  std::vector<double> mass;

  void add(int t, double m) {
    auto it = std::lower_bound(tau.begin(), tau.end(), t);
    std::size_t idx = static_cast<std::size_t>(it - tau.begin());
    if (it == tau.end() || *it != t) {
      tau.insert(it, t);
      mass.insert(mass.begin() + static_cast<std::ptrdiff_t>(idx), m);
    } else {
      mass[idx] += m;
    }
  }

  double total() const {
    double s = 0;
    for (double m : mass) s += m;
    return s;
  }
};

// Largest consecutive ratio over the last `window` block pairs.
double tail_ratio(const std::vector<double>& mass, int window) {
  if (mass.size() < 2) return 0.0;
  std::size_t first = mass.size() > static_cast<std::size_t>(window) + 1
                          ? mass.size() - static_cast<std::size_t>(window) - 1
                          : 0;
  double worst = 0.0;
  for (std::size_t i = first; i + 1 < mass.size(); ++i) {
    if (mass[i] <= 0) return kInf;
    worst = std::max(worst, mass[i + 1] / mass[i]);
  }
  return worst;
}

bool blocks_diverge(const TauBlocks& blocks) {
  if (blocks.tau.size() < 5) return false;
  std::size_t n = blocks.mass.size();
  double total = blocks.total();
  if (blocks.mass[n - 1] <= 1e-9 * total) return false;
  for (std::size_t i = n - 5; i + 1 < n; ++i) {
    if (blocks.mass[i] <= 0) return false;
    if (blocks.mass[i + 1] / blocks.mass[i] <= kDivergeRatio) return false;
  }
  return true;
}

std::vector<double> first_symbol_marginal(const CylinderMeasure& m, int alphabet) {
  std::vector<double> w(static_cast<std::size_t>(alphabet), 0.0);
  for (const auto& [word, p] : m.weights) {
    if (word.empty() || word[0] < 0 || word[0] >= alphabet)
      fail(Cond::BadConfig, "cylinder word outside the scheme alphabet");
    w[static_cast<std::size_t>(word[0])] += p;
  }
  return w;
}

double conditional_entropy(const CylinderMeasure& m) {
  if (m.depth <= 1) {
    double h = 0;
    for (const auto& [word, p] : m.weights)
      if (p > 0) h -= p * std::log(p);
    return h;
  }
  std::map<std::vector<int>, double> pref;
  for (const auto& [word, p] : m.weights) {
    std::vector<int> head(word.begin(), word.end() - 1);
    pref[head] += p;
  }
  double h = 0;
  for (const auto& [word, p] : m.weights) {
    if (p <= 0) continue;
    std::vector<int> head(word.begin(), word.end() - 1);
    h -= p * std::log(p / pref[head]);
  }
  return h;
}

CylinderMeasure marginalize_last(const CylinderMeasure& m) {
  CylinderMeasure out;
  out.depth = m.depth - 1;
  out.alphabet = m.alphabet;
  std::map<std::vector<int>, double> acc;
  for (const auto& [word, p] : m.weights)
    acc[std::vector<int>(word.begin(), word.end() - 1)] += p;
  out.weights.assign(acc.begin(), acc.end());
  return out;
}

// Mean of phi over `interval` by midpoint rule on a small fixed grid.
double quad_mean(const PotentialSpec& base, const IntervalMap& m, Interval interval) {
  double sum = 0;
  for (int g = 0; g < kQuadPoints; ++g) {
    double x = interval.lo + interval.length() * (g + 0.5) / kQuadPoints;
    sum += phi_point(base, m, x);
  }
  return sum / kQuadPoints;
}

// Fit log nu(tau >= n) against n.  The last few blocks carry pure truncation
// error (the tail is cut, not small), so the fit stops once the remaining
// tail drops under 1e-6 of the total.
LinFit fit_tail(const TauBlocks& blocks) {
  double total = blocks.total();
  std::vector<double> xs, ys;
  double tail = total;
  for (std::size_t i = 0; i < blocks.mass.size(); ++i) {
    if (tail <= 1e-6 * total && xs.size() >= 3) break;
    if (tail <= 1e-300) break;
    if (i + 1 == blocks.mass.size() && xs.size() >= 3) break;
    xs.push_back(blocks.tau[i]);
    ys.push_back(std::log(tail));
    tail -= blocks.mass[i];
  }
  return fit_linear(xs, ys);
}

void require_class_values(const InducingScheme& s, const InducedPotential& pot) {
  if (pot.class_values_ok) return;
  for (const auto& c : s.classes)
    if (!c.materialized)
      fail(Cond::BadConfig,
           "custom potential has no closed form on unmaterialized class levels");
}

}  // namespace

double InducedPotential::eval(double x) const {
  const InducingScheme& s = *scheme;
  int idx = s.find_element(x);
  if (idx < 0) fail(Cond::NotInW, "x=" + fmt_g17(x) + " lies in no basic element");
  const BasicElement& e = s.elements[static_cast<std::size_t>(idx)];
  if (base.tag == "constant") return base.c * e.tau;
  if (base.tag == "phi_t") return -base.t * induced_log_dF(s, x);
  double sum = 0, y = x;
  for (int w : e.branch_word) {
    const Branch& b = s.map->branches()[static_cast<std::size_t>(w)];
    sum += phi_point(base, *s.map, y);
    y = b.forward(y);
  }
  return sum;
}

InducedPotential induce(const InducingScheme& s, const PotentialSpec& base) {
  if (s.elements.empty()) fail(Cond::BadConfig, "scheme has no materialized elements");
  if (base.tag != "phi_t" && base.tag != "constant" && base.tag != "custom")
    fail(Cond::BadConfig, "unknown potential tag \"" + base.tag + "\"");
  if (base.tag == "custom" && !base.custom)
    fail(Cond::BadConfig, "custom potential needs an evaluator");

  InducedPotential pot;
  pot.scheme = &s;
  pot.base = base;
  int A = s.alphabet();
  pot.value.resize(static_cast<std::size_t>(A));
  pot.sup.resize(static_cast<std::size_t>(A));
  pot.inf.resize(static_cast<std::size_t>(A));
  for (int j = 0; j < A; ++j) {
    const BasicElement& e = s.elements[static_cast<std::size_t>(j)];
    auto ji = static_cast<std::size_t>(j);
    if (base.tag == "constant") {
      double v = base.c * e.tau;
      pot.value[ji] = pot.sup[ji] = pot.inf[ji] = v;
    } else if (base.tag == "phi_t") {
      double hi = -base.t * (base.t >= 0 ? e.log_dF_inf : e.log_dF_sup);
      double lo = -base.t * (base.t >= 0 ? e.log_dF_sup : e.log_dF_inf);
      pot.sup[ji] = hi;
      pot.inf[ji] = lo;
      if (e.log_dF_sup - e.log_dF_inf < 1e-14)
        pot.value[ji] = -base.t * e.log_dF_inf;
      else
        pot.value[ji] = -base.t * induced_log_dF(s, code_word(s, {j}, true));
    } else {
      double vmin = kInf, vmax = -kInf;
      for (int g = 0; g < kQuadPoints; ++g) {
        double x = e.J.lo + e.J.length() * (g + 0.5) / kQuadPoints;
        double v = pot.eval(x);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
      pot.value[ji] = pot.eval(code_word(s, {j}, true));
      pot.sup[ji] = std::max(vmax, pot.value[ji]);
      pot.inf[ji] = std::min(vmin, pot.value[ji]);
    }
  }
  pot.class_value.resize(s.classes.size(), 0.0);
  for (std::size_t i = 0; i < s.classes.size(); ++i) {
    const LevelClass& c = s.classes[i];
    if (base.tag == "constant")
      pot.class_value[i] = base.c * c.tau;
    else if (base.tag == "phi_t")
      pot.class_value[i] = -base.t * c.log_dF;
    else if (!c.materialized)
      pot.class_values_ok = false;
  }
  return pot;
}

ShiftPotential make_shift_potential(const InducingScheme& s, const InducedPotential& pot,
                                    int depth, double shift_c) {
  if (pot.scheme != &s) fail(Cond::BadConfig, "potential was induced on a different scheme");
  if (depth < 1) fail(Cond::BadConfig, "depth must be >= 1");
  require_class_values(s, pot);

  ShiftPotential sp;
  sp.alphabet = s.alphabet();
  sp.depth = depth;
  sp.tau.reserve(s.elements.size());
  for (const auto& e : s.elements) sp.tau.push_back(e.tau);
  long double tail = 0;
  for (std::size_t i = 0; i < s.classes.size(); ++i) {
    const LevelClass& c = s.classes[i];
    if (c.materialized || c.count == 0) continue;
    tail += static_cast<long double>(c.count) *
            std::exp(static_cast<long double>(pot.class_value[i] - shift_c * c.tau));
  }
  sp.tail_weight = static_cast<double>(tail);

  if (depth == 1) {
    auto vals = std::make_shared<std::vector<double>>(pot.value);
    for (std::size_t j = 0; j < vals->size(); ++j)
      (*vals)[j] -= shift_c * s.elements[j].tau;
    sp.eval_window = [vals](const std::vector<int>& w) {
      return (*vals)[static_cast<std::size_t>(w[0])];
    };
  } else {
    auto held = std::make_shared<InducedPotential>(pot);
    const InducingScheme* sptr = &s;
    sp.eval_window = [held, sptr, shift_c](const std::vector<int>& w) {
      double x = code_word(*sptr, w, true);
      return held->eval(x) - shift_c * sptr->elements[static_cast<std::size_t>(w[0])].tau;
    };
  }
  return sp;
}

double induced_shift_pressure(const InducingScheme& s, const InducedPotential& pot, double c,
                              int depth, int threads) {
  if (depth <= 1) {
    require_class_values(s, pot);
    std::vector<double> terms;
    terms.reserve(s.elements.size() + s.classes.size());
    for (std::size_t j = 0; j < s.elements.size(); ++j)
      terms.push_back(pot.value[j] - c * s.elements[j].tau);
    for (std::size_t i = 0; i < s.classes.size(); ++i) {
      const LevelClass& cl = s.classes[i];
      if (cl.materialized || cl.count == 0) continue;
      terms.push_back(std::log(static_cast<double>(cl.count)) + pot.class_value[i] -
                      c * cl.tau);
    }
    double m = -kInf;
    for (double t : terms) m = std::max(m, t);
    if (m == -kInf) fail(Cond::BadConfig, "no terms in the pressure sum");
    double sum = 0;
    for (double t : terms) sum += std::exp(t - m);
    return m + std::log(sum);
  }
  ShiftPotential sp = make_shift_potential(s, pot, depth, c);
  return gurevich_pressure_operator(sp, depth, threads);
}

PLReport compute_PL(const InducingScheme& s, const InducedPotential& pot, int depth,
                    int threads) {
  auto g = [&](double c) { return induced_shift_pressure(s, pot, c, depth, threads); };
  static const double scan[] = {-50, -32, -16, -8, -4, -2, -1, 0,
                                1,   2,   4,   8,  16, 32, 50};
  PLReport rep;
  double prev_c = scan[0];
  double prev_g = g(prev_c);
  bool found = false;
  double lo = 0, hi = 0;
  for (std::size_t i = 1; i < sizeof(scan) / sizeof(scan[0]); ++i) {
    double cur_c = scan[i];
    double cur_g = g(cur_c);
    if (prev_g >= 0 && cur_g <= 0) {
      lo = prev_c;
      hi = cur_c;
      found = true;
      break;
    }
    prev_c = cur_c;
    prev_g = cur_g;
  }
  if (!found)
    fail(Cond::NoBracket,
         "P_G(phibar - c*tau) has no zero crossing for c in [-50, 50] at this truncation",
         "(P2)/(P3)");
  rep.bracket_lo = lo;
  rep.bracket_hi = hi;
  int iters = 0;
  while (hi - lo > kBisectWidth * std::max(1.0, std::fabs(lo) + std::fabs(hi)) &&
         iters < kBisectCap) {
    double mid = 0.5 * (lo + hi);
    if (g(mid) > 0)
      lo = mid;
    else
      hi = mid;
    ++iters;
  }
  rep.value = 0.5 * (lo + hi);
  rep.residual = std::fabs(g(rep.value));
  rep.iterations = iters;
  if (rep.residual > kRootTol)
    fail(Cond::NoConvergence,
         "pressure root residual " + fmt_g17(rep.residual) + " exceeds " + fmt_g17(kRootTol));
  return rep;
}

PotentialReport check_P(const InducingScheme& s, const InducedPotential& pot,
                        const std::vector<double>& eps_grid) {
  if (pot.scheme != &s) fail(Cond::BadConfig, "potential was induced on a different scheme");
  PotentialReport rep;

  {
    int vdepth = 9;
    ShiftPotential sp = make_shift_potential(s, pot, vdepth, 0.0);
    std::vector<double> xs, ys;
    double vmax = 0;
    for (int n = 1; n <= 6; ++n) {
      double v = variation(sp, n, 150, derive_seed(20240801ull, static_cast<std::uint64_t>(n)));
      vmax = std::max(vmax, v);
      if (v > 1e-300) {
        xs.push_back(n);
        ys.push_back(std::log(v));
      }
    }
    if (vmax <= 1e-12) {
      rep.p1.pass = true;
      rep.p1.A = vmax;
      rep.p1.r = 0;
      rep.notes.push_back("P1: oscillation at machine zero (locally constant windows)");
    } else {
      LinFit fit = fit_linear(xs, ys);
      rep.p1.A = std::exp(fit.intercept);
      rep.p1.r = std::exp(fit.slope);
      rep.p1.resid = fit.max_abs_residual;
      rep.p1.pass = fit.ok() && rep.p1.r < 1.0 - 1e-9 && fit.max_abs_residual < 2.0;
    }
  }

  TauBlocks p2;
  for (std::size_t j = 0; j < s.elements.size(); ++j)
    p2.add(s.elements[j].tau, std::exp(pot.sup[j]));
  require_class_values(s, pot);
  for (std::size_t i = 0; i < s.classes.size(); ++i) {
    const LevelClass& c = s.classes[i];
    if (c.materialized || c.count == 0) continue;
    p2.add(c.tau, static_cast<double>(c.count) * std::exp(pot.class_value[i]));
  }
  rep.p2_sum = p2.total();
  for (std::size_t i = 0; i < p2.tau.size(); ++i)
    rep.p2_contributions.emplace_back(p2.tau[i], p2.mass[i]);
  if (p2.tau.size() < 4) {
    rep.p2_pass = true;
    rep.p2_tail_ratio = tail_ratio(p2.mass, 5);
    rep.notes.push_back("P2: too few tau blocks to extrapolate; sum finite at this truncation");
  } else {
    rep.p2_tail_ratio = tail_ratio(p2.mass, 5);
    rep.p2_pass = rep.p2_tail_ratio < kTailRatio;
  }

  // (P3) tests the pressure-normalized potential, so the root must exist first.
  double pl = 0;
  bool have_pl = false;
  try {
    pl = compute_PL(s, pot, 1, 1).value;
    have_pl = true;
  } catch (const Error& e) {
    rep.notes.push_back(std::string("P3: pressure root unavailable (") + e.what() + ")");
  }
  if (have_pl) {
    std::vector<double> grid = eps_grid;
    if (grid.empty())
      for (int k = 1; k <= 12; ++k) grid.push_back(std::ldexp(1.0, -k));
    std::sort(grid.rbegin(), grid.rend());
    for (double eps : grid) {
      TauBlocks p3;
      for (std::size_t j = 0; j < s.elements.size(); ++j)
        p3.add(s.elements[j].tau,
               s.elements[j].tau * std::exp(pot.sup[j] + (eps - pl) * s.elements[j].tau));
      for (std::size_t i = 0; i < s.classes.size(); ++i) {
        const LevelClass& c = s.classes[i];
        if (c.materialized || c.count == 0) continue;
        p3.add(c.tau, c.tau * static_cast<double>(c.count) *
                          std::exp(pot.class_value[i] + (eps - pl) * c.tau));
      }
      bool fine;
      if (p3.tau.size() < 4) {
        fine = true;
      } else {
        fine = tail_ratio(p3.mass, 5) < kTailRatio;
      }
      if (fine) {
        rep.p3_pass = true;
        rep.p3_eps0 = eps;
        break;
      }
    }
    if (p2.tau.size() < 4 && rep.p3_pass)
      rep.notes.push_back("P3: shallow truncation, margin not extrapolated");
  }

  rep.p4_pass = true;
  rep.p4_K = 0;
  rep.p4_theta = 0;
  rep.notes.push_back("P4: deferred until a Gibbs measure exists");
  return rep;
}

double Q_of(const CylinderMeasure& nu, const InducingScheme& s) {
  if (nu.alphabet != s.alphabet())
    fail(Cond::BadConfig, "measure alphabet does not match the scheme");
  std::vector<double> w = first_symbol_marginal(nu, s.alphabet());
  double total = 0;
  for (double v : w) total += v;
  if (!(total > 0)) fail(Cond::ZeroWeightCylinder, "measure has no mass");
  double q = 0;
  for (std::size_t j = 0; j < w.size(); ++j) q += s.elements[j].tau * (w[j] / total);
  return q;
}

TowerMeasure lift(const CylinderMeasure& nu, const InducingScheme& s) {
  if (nu.alphabet != s.alphabet())
    fail(Cond::BadConfig, "measure alphabet does not match the scheme");
  std::vector<double> w = first_symbol_marginal(nu, s.alphabet());
  double total = 0;
  for (double v : w) total += v;
  if (!(total > 0)) fail(Cond::ZeroWeightCylinder, "measure has no mass");

  TauBlocks blocks;
  for (std::size_t j = 0; j < w.size(); ++j)
    blocks.add(s.elements[j].tau, s.elements[j].tau * (w[j] / total));
  if (blocks_diverge(blocks))
    fail(Cond::QDiverges,
         "tau-weighted partial sums do not decay across the last tau blocks; "
         "the measure is not liftable at any truncation");

  TowerMeasure mu;
  mu.nu = nu;
  for (auto& [word, p] : mu.nu.weights) p /= total;
  mu.Q = 0;
  for (double c : blocks.mass) mu.Q += c;
  if (!(mu.Q >= 1.0 - 1e-12))
    fail(Cond::BadConfig, "mean return time " + fmt_g17(mu.Q) + " below 1");

  std::size_t slots = 0;
  for (std::size_t j = 0; j < w.size(); ++j)
    if (w[j] > 0) slots += static_cast<std::size_t>(s.elements[j].tau);
  mu.levels.reserve(slots);
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] <= 0) continue;
    double mass = (w[j] / total) / mu.Q;
    for (int k = 0; k < s.elements[j].tau; ++k)
      mu.levels.push_back({{static_cast<int>(j), k}, mass});
  }

  TauBlocks nu_blocks;
  for (std::size_t j = 0; j < w.size(); ++j)
    if (w[j] > 0) nu_blocks.add(s.elements[j].tau, w[j] / total);
  LinFit fit = fit_tail(nu_blocks);
  if (fit.ok() && fit.slope < 0) {
    mu.p4_pass = fit.max_abs_residual < 1.0;
    mu.p4_theta = std::exp(fit.slope);
    mu.p4_K = std::exp(fit.intercept + fit.max_abs_residual);
  }
  return mu;
}

TowerMeasure equilibrium(const InducingScheme& s, const PotentialSpec& base, int depth,
                         bool force, int threads) {
  InducedPotential pot = induce(s, base);
  PotentialReport rep = check_P(s, pot);

  if (base.tag == "phi_t") {
    SchemeReport sr;
    bool have_sr = false;
    try {
      sr = verify_scheme(s, 3);
      have_sr = true;
    } catch (const Error&) {
    }
    if (have_sr && sr.lambda1 > 1 && sr.lambda3 >= sr.lambda1 && sr.gamma >= 1) {
      TBounds tb = t_bounds(sr.lambda1, sr.lambda3, sr.gamma);
      if (!tb.degenerate && (base.t < tb.t0 - 1e-9 || base.t > tb.t1 + 1e-9) && !force) {
        std::ostringstream os;
        os << "t=" << fmt_g17(base.t) << " outside the certified range ["
           << fmt_g17(tb.t0) << ", " << fmt_g17(tb.t1) << "]";
        fail(Cond::BadConfig, os.str(), rep.p2_pass ? "(P3)" : "(P2)");
      }
    }
  }
  if (!(rep.p1.pass && rep.p3_pass) && !force)
    fail(Cond::BadConfig, "induced potential fails admissibility at this truncation",
         rep.p1.pass ? "(P3)" : "(P1)");

  PLReport pl = compute_PL(s, pot, depth, threads);
  ShiftPotential sp = make_shift_potential(s, pot, depth, pl.value);
  CylinderMeasure m = gibbs_weights(sp, depth, threads);
  gibbs_constants(m, sp, depth + 1);

  TowerMeasure mu = lift(m, s);
  mu.P_used = pl.value;
  std::ostringstream os;
  if (base.tag == "phi_t")
    os << "phi_t t=" << fmt_g17(base.t);
  else if (base.tag == "constant")
    os << "constant c=" << fmt_g17(base.c);
  else
    os << "custom potential";
  os << ", P=" << fmt_g17(pl.value);
  mu.note = os.str();
  return mu;
}

AbramovKac verify_abramov_kac(const TowerMeasure& mu, const InducingScheme& s,
                              const InducedPotential& pot) {
  if (mu.nu.alphabet != s.alphabet())
    fail(Cond::BadConfig, "measure alphabet does not match the scheme");
  AbramovKac out;
  out.Q = mu.Q;
  out.h_F = conditional_entropy(mu.nu);
  if (mu.nu.depth > 1)
    out.h_step = std::fabs(out.h_F - conditional_entropy(marginalize_last(mu.nu)));

  std::vector<double> w = first_symbol_marginal(mu.nu, s.alphabet());

  if (s.map->kind() == "doubling") {
    double total_len = 0;
    for (const auto& e : s.elements) total_len += e.J.length();
    double worst = 0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      double lw = s.elements[j].J.length() / total_len;
      worst = std::max(worst, std::fabs(w[j] - lw) / std::max(lw, 1e-300));
    }
    if (worst < 1e-6) {
      out.entropy_available = true;
      out.h_f = std::log(2.0);
      out.entropy_residual = std::fabs(out.h_F - out.Q * out.h_f);
    }
  }

  double phibar_int = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] <= 0) continue;
    const BasicElement& e = s.elements[j];
    double mean;
    if (pot.sup[j] - pot.inf[j] < 1e-14) {
      mean = pot.value[j];
    } else {
      double sum = 0;
      for (int g = 0; g < kQuadPoints; ++g) {
        double x = e.J.lo + e.J.length() * (g + 0.5) / kQuadPoints;
        sum += pot.eval(x);
      }
      mean = sum / kQuadPoints;
    }
    phibar_int += w[j] * mean;
  }
  out.phibar_int = phibar_int;

  double phi_int = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] <= 0) continue;
    const BasicElement& e = s.elements[j];
    double mass = w[j] / mu.Q;
    Interval slice = e.J;
    for (int k = 0; k < e.tau; ++k) {
      phi_int += mass * quad_mean(pot.base, *s.map, slice);
      if (k + 1 < e.tau) {
        const Branch& b =
            s.map->branches()[static_cast<std::size_t>(e.branch_word[static_cast<std::size_t>(k)])];
        double a = b.forward(slice.lo), z = b.forward(slice.hi);
        slice = Interval{std::min(a, z), std::max(a, z)};
      }
    }
  }
  out.phi_int = phi_int;
  out.kac_residual = std::fabs(out.phibar_int - out.Q * out.phi_int);
  if (!out.entropy_available)
    out.entropy_residual = std::numeric_limits<double>::quiet_NaN();
  return out;
}

PressureCurve pressure_curve(const InducingScheme& s, const std::vector<double>& t_grid,
                             int depth, int threads) {
  if (t_grid.empty()) fail(Cond::BadConfig, "empty t grid");
  PressureCurve curve;
  try {
    SchemeReport sr = verify_scheme(s, 3);
    curve.lambda1 = sr.lambda1;
    curve.lambda3 = sr.lambda3;
  } catch (const Error&) {
  }

  for (double t : t_grid) {
    CurveSample cs;
    cs.t = t;
    try {
      PotentialSpec spec;
      spec.tag = "phi_t";
      spec.t = t;
      TowerMeasure mu = equilibrium(s, spec, depth, false, threads);
      cs.P_t = mu.P_used;
      cs.Q_t = mu.Q;
      cs.C1 = mu.nu.C1;
      cs.C2 = mu.nu.C2;
      cs.leakage = mu.nu.leakage;
      cs.p4_theta = mu.p4_theta;
      cs.ok = true;
    } catch (const Error& e) {
      cs.err = e.what();
    }
    curve.samples.push_back(std::move(cs));
  }

  std::vector<const CurveSample*> ok;
  for (const auto& cs : curve.samples)
    if (cs.ok) ok.push_back(&cs);
  std::sort(ok.begin(), ok.end(),
            [](const CurveSample* a, const CurveSample* b) { return a->t < b->t; });
  curve.monotone = true;
  curve.convex = true;
  for (std::size_t i = 0; i + 1 < ok.size(); ++i) {
    if (ok[i + 1]->P_t > ok[i]->P_t + 1e-10) curve.monotone = false;
    if (i + 2 < ok.size()) {
      double s1 = (ok[i + 1]->P_t - ok[i]->P_t) / (ok[i + 1]->t - ok[i]->t);
      double s2 = (ok[i + 2]->P_t - ok[i + 1]->P_t) / (ok[i + 2]->t - ok[i + 1]->t);
      if (s2 < s1 - 1e-8) curve.convex = false;
    }
  }
  curve.st_bounds_pass = true;
  if (curve.lambda1 > 1 && curve.lambda3 >= curve.lambda1) {
    for (const CurveSample* cs : ok) {
      if (cs->t <= 1 && cs->P_t + 1e-4 < (1 - cs->t) * std::log(curve.lambda1))
        curve.st_bounds_pass = false;
      if (cs->t >= 1 && cs->P_t + 1e-4 < (1 - cs->t) * std::log(curve.lambda3))
        curve.st_bounds_pass = false;
    }
  }
  return curve;
}

std::string pressure_curve_to_csv(const PressureCurve& curve) {
  std::string out = "t,P_t,Q_t,C1,C2,leakage,p4_theta\n";
  for (const auto& cs : curve.samples) {
    if (!cs.ok) continue;
    out += fmt_g17(cs.t) + "," + fmt_g17(cs.P_t) + "," + fmt_g17(cs.Q_t) + "," +
           fmt_g17(cs.C1) + "," + fmt_g17(cs.C2) + "," + fmt_g17(cs.leakage) + "," +
           fmt_g17(cs.p4_theta) + "\n";
  }
  return out;
}

std::string tower_to_csv(const TowerMeasure& mu) {
  std::string out = "symbol,k,mass\n";
  for (const auto& [slot, mass] : mu.levels)
    out += std::to_string(slot.first) + "," + std::to_string(slot.second) + "," +
           fmt_g17(mass) + "\n";
  return out;
}

TBounds t_bounds(double lambda1, double lambda3, double gamma) {
  if (!(lambda1 > 1) || !(lambda3 >= lambda1) || !(gamma >= 1))
    fail(Cond::InvalidConstants,
         "need lambda3 >= lambda1 > 1 and gamma >= 1, got lambda1=" + fmt_g17(lambda1) +
             " lambda3=" + fmt_g17(lambda3) + " gamma=" + fmt_g17(gamma));
  TBounds tb;
  if (lambda3 <= lambda1 * (1 + 1e-12)) {
    tb.degenerate = true;
    tb.t0 = -kInf;
    tb.t1 = kInf;
    return tb;
  }
  tb.t1 = std::log(lambda3) / std::log(lambda3 / lambda1);
  if (gamma <= lambda1)
    tb.t0 = std::log(gamma / lambda1) / std::log(lambda3 / lambda1);
  else
    tb.t0 = 1.0 - std::log(lambda1) / std::log(gamma);
  return tb;
}

LiftabilityReport check_liftability(const InducingScheme& s, const std::vector<double>& masses) {
  LiftabilityReport rep;
  TauBlocks blocks;
  if (masses.empty()) {
    for (const auto& c : s.classes)
      if (c.total_len > 0) blocks.add(c.tau, c.tau * c.total_len);
    double norm = 0;
    for (const auto& c : s.classes) norm += c.total_len;
    for (double& m : blocks.mass) m /= norm;
    rep.note = "length density over all levels";
  } else {
    if (masses.size() != s.elements.size())
      fail(Cond::BadConfig, "masses must give one entry per materialized element");
    double norm = 0;
    for (double m : masses) norm += m;
    if (!(norm > 0)) fail(Cond::ZeroWeightCylinder, "density has no mass");
    for (std::size_t j = 0; j < masses.size(); ++j)
      blocks.add(s.elements[j].tau, s.elements[j].tau * masses[j] / norm);
    rep.note = "custom density on materialized elements";
  }
  for (std::size_t i = 0; i < blocks.tau.size(); ++i)
    rep.contributions.emplace_back(blocks.tau[i], blocks.mass[i]);
  rep.Q_partial = blocks.total();

  std::size_t k = blocks.tau.size();
  if (k < 2) {
    rep.verdict = "liftable";
    rep.note += "; single tau block, sum trivially finite";
    return rep;
  }
  double worst = tail_ratio(blocks.mass, 4);
  if (worst < kDivergeRatio) {
    rep.verdict = "liftable";
    rep.note += "; tail contributions decay geometrically";
  } else if (blocks_diverge(blocks)) {
    rep.verdict = "not-liftable";
    rep.note += "; per-tau contributions do not decay, partial sums grow about linearly";
  } else {
    rep.verdict = "inconclusive";
    rep.note += "; tail trend not resolved at this truncation";
  }
  return rep;
}

}  // namespace thermoscheme
