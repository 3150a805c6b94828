#include "thermoscheme/shift.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <sstream>

namespace thermoscheme {

namespace {

constexpr std::size_t kStateCap = 2000000;
constexpr std::size_t kOrbitStateCap = 2000;
constexpr std::size_t kAuditCap = 200000;
constexpr int kPowerIterCap = 100000;
constexpr double kPowerTol = 1e-12;
constexpr std::size_t kParChunk = 8192;
constexpr std::size_t kParMin = 65536;

std::size_t checked_states(int alphabet, int depth, std::size_t cap, const std::string& what) {
  if (alphabet < 1) fail(Cond::BadConfig, "alphabet must be nonempty");
  if (depth < 1) fail(Cond::BadConfig, "cylinder depth must be >= 1");
  std::size_t S = 1;
  for (int k = 0; k < depth; ++k) {
    if (S > cap / static_cast<std::size_t>(alphabet))
      fail(Cond::CapExceeded, what + " needs " + std::to_string(alphabet) + "^" +
                                  std::to_string(depth) + " states, above the cap " +
                                  std::to_string(cap));
    S *= static_cast<std::size_t>(alphabet);
  }
  return S;
}

std::vector<int> decode_word(std::size_t idx, int alphabet, int depth) {
  std::vector<int> w(static_cast<std::size_t>(depth));
  for (int k = depth - 1; k >= 0; --k) {
    w[static_cast<std::size_t>(k)] = static_cast<int>(idx % static_cast<std::size_t>(alphabet));
    idx /= static_cast<std::size_t>(alphabet);
  }
  return w;
}

std::size_t encode_word(const std::vector<int>& w, int alphabet) {
  std::size_t idx = 0;
  for (int s : w) idx = idx * static_cast<std::size_t>(alphabet) + static_cast<std::size_t>(s);
  return idx;
}

// States are depth-d words indexed big-endian, so the successors of
// (a_0..a_{d-1}) are exactly (i mod A^{d-1})*A + b and the matvec costs O(S).
struct ShiftOperator {
  int alphabet = 0;
  int depth = 1;
  std::size_t S = 0;
  std::size_t blocks = 0;
  double lambda = 0.0;
  std::vector<double> w;
  std::vector<double> r;
  std::vector<double> l;
};

unsigned effective_workers(std::size_t S, int threads) {
  return S >= kParMin ? static_cast<unsigned>(std::max(threads, 1)) : 1u;
}

// Sequential summation noise grows like n*ulp, which keeps the power-iteration
// residual above tolerance on 1e5-symbol alphabets; pairwise halving keeps it
// near machine precision.
double pairwise_sum(const double* a, std::size_t n) {
  if (n <= 8) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

void fill_weights(const ShiftPotential& pot, ShiftOperator& op, int threads) {
  if (!pot.eval_window) fail(Cond::BadConfig, "potential has no evaluator");
  op.w.assign(op.S, 0.0);
  std::atomic<std::size_t> bad{op.S};
  parallel_chunks(op.S, kParChunk, effective_workers(op.S, threads),
                  [&](std::size_t, std::size_t b, std::size_t e) {
                    for (std::size_t i = b; i < e; ++i) {
                      auto word = decode_word(i, op.alphabet, op.depth);
                      double phi = potential_value(pot, word, 0);
                      double wi = std::exp(phi);
                      if (!std::isfinite(phi) || !std::isfinite(wi)) {
                        std::size_t expect = op.S;
                        bad.compare_exchange_strong(expect, i);
                        wi = 0;
                      }
                      op.w[i] = wi;
                    }
                  });
  if (bad.load() != op.S)
    fail(Cond::BadConfig,
         "potential is not finite on cylinder index " + std::to_string(bad.load()));
}

void apply_right(const ShiftOperator& op, const std::vector<double>& v,
                 std::vector<double>& out, std::vector<double>& u, int threads) {
  const std::size_t A = static_cast<std::size_t>(op.alphabet);
  unsigned workers = effective_workers(op.S, threads);
  parallel_chunks(op.blocks, kParChunk, workers,
                  [&](std::size_t, std::size_t b, std::size_t e) {
                    for (std::size_t t = b; t < e; ++t) {
                      double acc = 0;
                      const std::size_t base = t * A;
                      for (std::size_t s = 0; s < A; ++s) acc += op.w[base + s] * v[base + s];
                      u[t] = acc;
                    }
                  });
  parallel_chunks(op.S, kParChunk, workers, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = u[i % op.blocks];
  });
}

void apply_left(const ShiftOperator& op, const std::vector<double>& v, std::vector<double>& out,
                std::vector<double>& h, int threads) {
  const std::size_t A = static_cast<std::size_t>(op.alphabet);
  unsigned workers = effective_workers(op.S, threads);
  parallel_chunks(op.blocks, kParChunk, workers,
                  [&](std::size_t, std::size_t b, std::size_t e) {
                    for (std::size_t t = b; t < e; ++t) {
                      double acc = 0;
                      for (std::size_t a = 0; a < A; ++a) acc += v[a * op.blocks + t];
                      h[t] = acc;
                    }
                  });
  parallel_chunks(op.S, kParChunk, workers, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = op.w[i] * h[i / A];
  });
}

double power_iterate(const ShiftOperator& op, std::vector<double>& v, bool left, int threads,
                     const char* side) {
  std::vector<double> nv(op.S), scratch(op.blocks);
  double lambda = 0, res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kPowerIterCap; ++it) {
    if (left)
      apply_left(op, v, nv, scratch, threads);
    else
      apply_right(op, v, nv, scratch, threads);
    double sum = pairwise_sum(nv.data(), op.S);
    double vmax = 0;
    for (std::size_t i = 0; i < op.S; ++i) vmax = std::max(vmax, v[i]);
    if (!(sum > 0) || !std::isfinite(sum) || !(vmax > 0))
      fail(Cond::NoConvergence,
           std::string(side) + " power iteration lost positivity at step " +
               std::to_string(it));
    lambda = sum;
    res = 0;
    for (std::size_t i = 0; i < op.S; ++i)
      res = std::max(res, std::fabs(nv[i] - lambda * v[i]));
    res /= lambda * vmax;
    for (std::size_t i = 0; i < op.S; ++i) v[i] = nv[i] / sum;
    if (res < kPowerTol) return lambda;
  }
  fail(Cond::NoConvergence, std::string(side) + " power iteration stalled at residual " +
                                fmt_g17(res) + " after " + std::to_string(kPowerIterCap) +
                                " steps");
}

ShiftOperator build_operator(const ShiftPotential& pot, int depth, int threads) {
  ShiftOperator op;
  op.alphabet = pot.alphabet;
  op.depth = depth;
  op.S = checked_states(pot.alphabet, depth, kStateCap, "cylinder operator");
  op.blocks = op.S / static_cast<std::size_t>(pot.alphabet);
  fill_weights(pot, op, threads);
  op.r.assign(op.S, 1.0 / static_cast<double>(op.S));
  op.lambda = power_iterate(op, op.r, false, threads, "right");
  op.l.assign(op.S, 1.0 / static_cast<double>(op.S));
  power_iterate(op, op.l, true, threads, "left");
  return op;
}

void audit_constants(CylinderMeasure& m, const ShiftOperator& op, const ShiftPotential& pot,
                     int audit_depth, std::uint64_t seed) {
  const std::size_t A = static_cast<std::size_t>(m.alphabet);
  const int d = m.depth;
  double total = std::pow(static_cast<double>(A), static_cast<double>(audit_depth));
  bool enumerate = total <= static_cast<double>(kAuditCap);
  std::size_t count = enumerate ? static_cast<std::size_t>(total) : kAuditCap;
  std::mt19937_64 rng(derive_seed(seed, 99));
  std::uniform_int_distribution<int> sym(0, m.alphabet - 1);
  std::vector<int> wbuf(static_cast<std::size_t>(audit_depth));
  double c1 = std::numeric_limits<double>::infinity(), c2 = 0;
  for (std::size_t q = 0; q < count; ++q) {
    if (enumerate) {
      std::size_t idx = q;
      for (int k = audit_depth - 1; k >= 0; --k) {
        wbuf[static_cast<std::size_t>(k)] = static_cast<int>(idx % A);
        idx /= A;
      }
    } else {
      for (auto& s : wbuf) s = sym(rng);
    }
    double nu;
    if (audit_depth <= d) {
      std::size_t comp = 1;
      for (int k = 0; k < d - audit_depth; ++k) comp *= A;
      std::size_t base = encode_word(wbuf, m.alphabet) * comp;
      nu = 0;
      for (std::size_t i = 0; i < comp; ++i) nu += m.weights[base + i].second;
    } else {
      std::vector<int> head(wbuf.begin(), wbuf.begin() + d);
      std::size_t s = encode_word(head, m.alphabet);
      nu = m.weights[s].second;
      for (int k = 0; k + d < audit_depth; ++k) {
        std::size_t snext =
            (s % op.blocks) * A + static_cast<std::size_t>(wbuf[static_cast<std::size_t>(k + d)]);
        double denom = op.lambda * op.r[s];
        if (!(denom > 0))
          fail(Cond::ZeroWeightCylinder, "transition row has zero mass in audit range");
        nu *= op.w[snext] * op.r[snext] / denom;
        s = snext;
      }
    }
    if (!(nu > 0)) fail(Cond::ZeroWeightCylinder, "cylinder with zero measure in audit range");
    double ref = std::exp(-static_cast<double>(audit_depth) * m.P_G +
                          potential_cycle_sum(pot, wbuf));
    double ratio = nu / ref;
    c1 = std::min(c1, ratio);
    c2 = std::max(c2, ratio);
  }
  m.C1 = c1;
  m.C2 = c2;
}

}  // namespace

double potential_value(const ShiftPotential& pot, const std::vector<int>& word,
                       std::size_t start) {
  if (word.empty()) fail(Cond::BadConfig, "empty word");
  if (!pot.eval_window) fail(Cond::BadConfig, "potential has no evaluator");
  std::vector<int> win(static_cast<std::size_t>(pot.depth));
  for (std::size_t k = 0; k < win.size(); ++k) {
    int sym = word[(start + k) % word.size()];
    if (sym < 0 || sym >= pot.alphabet)
      fail(Cond::BadConfig, "symbol " + std::to_string(sym) + " outside the alphabet");
    win[k] = sym;
  }
  return pot.eval_window(win);
}

double potential_cycle_sum(const ShiftPotential& pot, const std::vector<int>& word) {
  double acc = 0;
  for (std::size_t i = 0; i < word.size(); ++i) acc += potential_value(pot, word, i);
  return acc;
}

ShiftPotential first_symbol_potential(const std::vector<double>& values) {
  if (values.empty()) fail(Cond::BadConfig, "no symbol values");
  ShiftPotential pot;
  pot.alphabet = static_cast<int>(values.size());
  pot.depth = 1;
  pot.tau.assign(values.size(), 1);
  pot.eval_window = [values](const std::vector<int>& w) {
    return values[static_cast<std::size_t>(w[0])];
  };
  return pot;
}

double variation(const ShiftPotential& pot, int n, int samples, std::uint64_t seed) {
  if (n < 1) fail(Cond::BadConfig, "variation depth must be >= 1");
  if (pot.alphabet < 1 || !pot.eval_window) fail(Cond::BadConfig, "potential incomplete");
  if (n >= pot.depth) return 0.0;
  if (pot.depth > 64)
    fail(Cond::DepthInfeasible,
         "evaluator memory " + std::to_string(pot.depth) + " too deep to sample");
  const int ext_len = pot.depth - n;
  const int kExt = 24;
  if (static_cast<double>(samples) * kExt * pot.depth > 5e7)
    fail(Cond::DepthInfeasible, "variation sampling budget exceeded");
  std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(n)));
  std::uniform_int_distribution<int> sym(0, pot.alphabet - 1);
  double n_pref_full = std::pow(static_cast<double>(pot.alphabet), static_cast<double>(n));
  bool enumerate = n_pref_full <= 20000;
  std::size_t n_pref =
      enumerate ? static_cast<std::size_t>(n_pref_full) : static_cast<std::size_t>(samples);
  double worst = 0;
  std::vector<int> word(static_cast<std::size_t>(pot.depth));
  for (std::size_t p = 0; p < n_pref; ++p) {
    if (enumerate) {
      std::size_t idx = p;
      for (int k = n - 1; k >= 0; --k) {
        word[static_cast<std::size_t>(k)] =
            static_cast<int>(idx % static_cast<std::size_t>(pot.alphabet));
        idx /= static_cast<std::size_t>(pot.alphabet);
      }
    } else {
      for (int k = 0; k < n; ++k) word[static_cast<std::size_t>(k)] = sym(rng);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int trial = 0; trial < kExt; ++trial) {
      for (int k = 0; k < ext_len; ++k) {
        int v;
        if (trial == 0)
          v = word[static_cast<std::size_t>(k % n)];
        else if (trial == 1)
          v = 0;
        else
          v = sym(rng);
        word[static_cast<std::size_t>(n + k)] = v;
      }
      double val = pot.eval_window(word);
      lo = std::min(lo, val);
      hi = std::max(hi, val);
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

std::vector<PressureEstimate> gurevich_pressure_orbits(const ShiftPotential& pot, int n_max,
                                                       int base_symbol, int threads) {
  if (n_max < 1) fail(Cond::BadConfig, "n_max must be >= 1");
  if (base_symbol < 0 || base_symbol >= pot.alphabet)
    fail(Cond::BadConfig, "base symbol outside the alphabet");
  if ((n_max + 1) * std::log(static_cast<double>(std::max(pot.alphabet, 2))) >
      20.0 * std::log(10.0))
    fail(Cond::CapExceeded, "orbit sums capped at alphabet^n <= 1e20");
  ShiftOperator op;
  op.alphabet = pot.alphabet;
  op.depth = pot.depth;
  op.S = checked_states(pot.alphabet, pot.depth, kOrbitStateCap, "orbit sum");
  op.blocks = op.S / static_cast<std::size_t>(pot.alphabet);
  fill_weights(pot, op, 1);

  const int steps = n_max + 1;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> contrib(
      op.blocks, std::vector<double>(static_cast<std::size_t>(steps), neg_inf));
  parallel_chunks(
      op.blocks, 8, static_cast<unsigned>(std::max(threads, 1)),
      [&](std::size_t, std::size_t b, std::size_t e) {
        std::vector<double> v(op.S), nv(op.S), u(op.blocks);
        for (std::size_t t = b; t < e; ++t) {
          std::size_t s = static_cast<std::size_t>(base_symbol) * op.blocks + t;
          std::fill(v.begin(), v.end(), 0.0);
          v[s] = 1.0;
          double logscale = 0;
          for (int k = 0; k < steps; ++k) {
            apply_right(op, v, nv, u, 1);
            double m = 0;
            for (std::size_t i = 0; i < op.S; ++i) m = std::max(m, nv[i]);
            if (!(m > 0)) break;
            logscale += std::log(m);
            for (std::size_t i = 0; i < op.S; ++i) v[i] = nv[i] / m;
            if (v[s] > 0)
              contrib[t][static_cast<std::size_t>(k)] = logscale + std::log(v[s]);
          }
        }
      });

  std::vector<double> logZ(static_cast<std::size_t>(steps), neg_inf);
  for (int k = 0; k < steps; ++k) {
    double mx = neg_inf;
    for (std::size_t t = 0; t < op.blocks; ++t)
      mx = std::max(mx, contrib[t][static_cast<std::size_t>(k)]);
    if (mx == neg_inf)
      fail(Cond::Degenerate, "periodic orbit sum vanished at length " + std::to_string(k + 1));
    double acc = 0;
    for (std::size_t t = 0; t < op.blocks; ++t) {
      double c = contrib[t][static_cast<std::size_t>(k)];
      if (c != neg_inf) acc += std::exp(c - mx);
    }
    logZ[static_cast<std::size_t>(k)] = mx + std::log(acc);
  }

  std::vector<PressureEstimate> out;
  out.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n)
    out.push_back({n, logZ[static_cast<std::size_t>(n)] - logZ[static_cast<std::size_t>(n - 1)]});
  return out;
}

double gurevich_pressure_operator(const ShiftPotential& pot, int depth, int threads) {
  ShiftOperator op = build_operator(pot, depth, threads);
  return std::log(op.lambda);
}

double CylinderMeasure::weight_of(const std::vector<int>& word) const {
  auto it = std::lower_bound(
      weights.begin(), weights.end(), word,
      [](const std::pair<std::vector<int>, double>& p, const std::vector<int>& w) {
        return p.first < w;
      });
  if (it == weights.end() || it->first != word) return 0.0;
  return it->second;
}

CylinderMeasure gibbs_weights(const ShiftPotential& pot, int depth, int threads) {
  ShiftOperator op = build_operator(pot, depth, threads);
  CylinderMeasure m;
  m.depth = depth;
  m.alphabet = pot.alphabet;
  m.P_G = std::log(op.lambda);
  double Z = 0;
  for (std::size_t i = 0; i < op.S; ++i) Z += op.l[i] * op.r[i];
  if (!(Z > 0)) fail(Cond::ZeroWeightCylinder, "eigenvector product mass vanished");
  m.weights.reserve(op.S);
  for (std::size_t i = 0; i < op.S; ++i)
    m.weights.push_back({decode_word(i, pot.alphabet, depth), op.l[i] * op.r[i] / Z});
  m.leakage = pot.tail_weight > 0 ? pot.tail_weight / (op.lambda + pot.tail_weight) : 0.0;
  if (depth >= 2) {
    const std::size_t A = static_cast<std::size_t>(pot.alphabet);
    double worst = 0;
    for (std::size_t t = 0; t < op.blocks; ++t) {
      double suffix = 0, prefix = 0;
      for (std::size_t b = 0; b < A; ++b) suffix += m.weights[t * A + b].second;
      for (std::size_t a = 0; a < A; ++a) prefix += m.weights[a * op.blocks + t].second;
      worst = std::max(worst, std::fabs(suffix - prefix));
    }
    m.consistency_defect = worst;
  }
  audit_constants(m, op, pot, depth, 4242);
  return m;
}

std::pair<double, double> gibbs_constants(CylinderMeasure& m, const ShiftPotential& pot,
                                          int audit_depth, std::uint64_t seed) {
  if (audit_depth < 1) fail(Cond::BadConfig, "audit depth must be >= 1");
  if (m.alphabet != pot.alphabet)
    fail(Cond::BadConfig, "measure and potential alphabets differ");
  if (m.weights.empty()) fail(Cond::BadConfig, "measure has no weights");
  ShiftOperator op = build_operator(pot, m.depth, 1);
  audit_constants(m, op, pot, audit_depth, seed);
  return {m.C1, m.C2};
}

std::string cylinder_measure_to_csv(const CylinderMeasure& m) {
  std::ostringstream out;
  out << "P_G,C1,C2,leakage\n"
      << fmt_g17(m.P_G) << ',' << fmt_g17(m.C1) << ',' << fmt_g17(m.C2) << ','
      << fmt_g17(m.leakage) << "\n";
  out << "word,weight\n";
  for (const auto& [w, v] : m.weights) {
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (k) out << '-';
      out << w[k];
    }
    out << ',' << fmt_g17(v) << "\n";
  }
  return out.str();
}

}  // namespace thermoscheme
