#include "thermoscheme/stats.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>

namespace thermoscheme {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kGammaFloor = 1e-6;
constexpr double kScaleRatioFloor = 0.45;  // coboundary block sums shrink like n^{-1/2}
constexpr double kSkipBudget = 0.01;
constexpr std::size_t kSampleChunk = 4096;

double unit_double(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

double normal_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }

std::size_t pow_sz(std::size_t a, int k) {
  std::size_t r = 1;
  for (int i = 0; i < k; ++i) r *= a;
  return r;
}

// Marginal tables of the cylinder measure, plus the tau-weighted element draw
// that starts tower orbits at stationarity.  marg[k] holds the depth-k word
// masses in lexicographic order; conditionals come from ratios of adjacent
// tables, which extends the measure past its depth as a stationary Markov
// chain of order depth-1.
struct MeasureTables {
  const InducingScheme* s = nullptr;
  int A = 0;
  int depth = 1;
  std::vector<std::vector<double>> marg;  // marg[k], k = 0..depth
  std::vector<double> cum1;               // cumulative first-symbol marginal
  std::vector<double> lift_cum;           // cumulative tau * nu1
  std::vector<double> cond_cum;           // depth 2: per-row cumulative conditionals
  double Q = 0;

  const std::vector<double>& nu1() const { return marg[1]; }
};

MeasureTables build_tables(const InducingScheme& s, const TowerMeasure& mu) {
  MeasureTables T;
  T.s = &s;
  T.A = mu.nu.alphabet > 0 ? mu.nu.alphabet : s.alphabet();
  T.depth = mu.nu.depth;
  if (T.A != s.alphabet())
    fail(Cond::BadConfig, "measure alphabet " + std::to_string(T.A) +
                              " does not match the scheme alphabet " +
                              std::to_string(s.alphabet()));
  std::size_t S = pow_sz(static_cast<std::size_t>(T.A), T.depth);
  if (mu.nu.weights.size() != S)
    fail(Cond::BadConfig, "cylinder table has " + std::to_string(mu.nu.weights.size()) +
                              " entries, expected the full depth-" + std::to_string(T.depth) +
                              " grid of " + std::to_string(S));

  T.marg.resize(T.depth + 1);
  auto& deepest = T.marg[T.depth];
  deepest.resize(S);
  double total = 0;
  for (std::size_t i = 0; i < S; ++i) {
    double w = mu.nu.weights[i].second;
    if (w < 0) fail(Cond::BadConfig, "negative cylinder weight");
    deepest[i] = w;
    total += w;
  }
  if (total <= 0) fail(Cond::Degenerate, "cylinder measure has zero total mass");
  for (auto& w : deepest) w /= total;
  for (int k = T.depth - 1; k >= 0; --k) {
    T.marg[k].assign(pow_sz(static_cast<std::size_t>(T.A), k), 0.0);
    for (std::size_t p = 0; p < T.marg[k].size(); ++p) {
      double sum = 0;
      for (int b = 0; b < T.A; ++b) sum += T.marg[k + 1][p * T.A + b];
      T.marg[k][p] = sum;
    }
  }

  T.cum1.resize(T.A);
  double acc = 0;
  for (int j = 0; j < T.A; ++j) {
    acc += T.nu1()[j];
    T.cum1[j] = acc;
  }
  T.cum1[T.A - 1] = 1.0;

  T.lift_cum.resize(T.A);
  acc = 0;
  for (int j = 0; j < T.A; ++j) {
    acc += s.elements[j].tau * T.nu1()[j];
    T.lift_cum[j] = acc;
  }
  T.Q = acc;
  if (!(T.Q > 0)) fail(Cond::Degenerate, "mean return time vanishes on this measure");
  for (auto& c : T.lift_cum) c /= T.Q;
  T.lift_cum[T.A - 1] = 1.0;

  if (T.depth == 2) {
    T.cond_cum.resize(S);
    for (int p = 0; p < T.A; ++p) {
      double row = T.marg[1][p];
      double run = 0;
      for (int b = 0; b < T.A; ++b) {
        run += row > 0 ? T.marg[2][p * static_cast<std::size_t>(T.A) + b] / row : T.nu1()[b];
        T.cond_cum[p * static_cast<std::size_t>(T.A) + b] = run;
      }
      T.cond_cum[p * static_cast<std::size_t>(T.A) + T.A - 1] = 1.0;
    }
  }
  return T;
}

int draw_cum(const std::vector<double>& cum, std::size_t begin, std::size_t end, double u) {
  auto it = std::upper_bound(cum.begin() + begin, cum.begin() + end, u);
  if (it == cum.begin() + end) --it;
  return static_cast<int>(it - (cum.begin() + begin));
}

int draw_first(const MeasureTables& T, std::mt19937_64& rng) {
  return draw_cum(T.cum1, 0, T.A, unit_double(rng));
}

int draw_lift_element(const MeasureTables& T, std::mt19937_64& rng) {
  return draw_cum(T.lift_cum, 0, T.A, unit_double(rng));
}

// Next symbol given the trailing history, using the deepest marginal that the
// history can condition on.
int draw_next(const MeasureTables& T, std::mt19937_64& rng, const std::vector<int>& word) {
  int h = std::min(static_cast<int>(word.size()), T.depth - 1);
  if (h <= 0) return draw_first(T, rng);
  std::size_t p = 0;
  for (std::size_t i = word.size() - h; i < word.size(); ++i)
    p = p * T.A + static_cast<std::size_t>(word[i]);
  double total = T.marg[h][p];
  if (total <= 0) return draw_first(T, rng);
  if (T.depth == 2) return draw_cum(T.cond_cum, p * T.A, (p + 1) * T.A, unit_double(rng));
  double u = unit_double(rng) * total;
  const auto& tab = T.marg[h + 1];
  double run = 0;
  for (int b = 0; b < T.A; ++b) {
    run += tab[p * static_cast<std::size_t>(T.A) + b];
    if (u <= run) return b;
  }
  return T.A - 1;
}

bool stream_supported(const InducingScheme& s, const MeasureTables& T) {
  return s.map && s.map->kind() == "doubling" && T.depth <= 2;
}

// Orbit of the doubling map under the lifted measure, simulated on the symbol
// level.  The binary digits of a point are the branch indices of its forward
// orbit, so the digit stream is the concatenated branch words of elements
// drawn from the measure chain; a 53-bit sliding window recovers the orbit
// point without the precision loss of iterating x -> 2x mod 1 in doubles.
struct DyadicStream {
  const MeasureTables* T = nullptr;
  std::mt19937_64 rng;
  std::vector<int> word;  // trailing element history for the chain
  std::array<unsigned char, 512> q{};
  int qh = 0, qn = 0;
  std::uint64_t win = 0;

  DyadicStream(const MeasureTables& tables, std::uint64_t seed) : T(&tables), rng(seed) {
    int j0 = draw_lift_element(*T, rng);
    const auto& e0 = T->s->elements[j0];
    int k = static_cast<int>(unit_double(rng) * e0.tau);
    if (k >= e0.tau) k = e0.tau - 1;
    push_word(e0, k);
    word.push_back(j0);
    for (int i = 0; i < 53; ++i) win = (win << 1) | next_bit();
  }

  void push_word(const BasicElement& e, int from) {
    for (std::size_t i = from; i < e.branch_word.size(); ++i) {
      q[(qh + qn) & 511] = static_cast<unsigned char>(e.branch_word[i]);
      ++qn;
    }
  }

  std::uint64_t next_bit() {
    while (qn == 0) {
      int j = draw_next(*T, rng, word);
      push_word(T->s->elements[j], 0);
      word.push_back(j);
      if (word.size() > 8) word.erase(word.begin());
    }
    std::uint64_t b = q[qh];
    qh = (qh + 1) & 511;
    --qn;
    return b;
  }

  double x() const { return win * 0x1.0p-53; }
  void step() { win = ((win << 1) & ((1ull << 53) - 1)) | next_bit(); }
};

// One stationary start drawn through the cylinder descent, shared by the
// sampling entry point and the real-orbit fallbacks.
double descend_point(const InducingScheme& s, const MeasureTables& T, std::mt19937_64& rng,
                     int depth, int* level_out) {
  int j0 = draw_lift_element(T, rng);
  const auto& e0 = s.elements[j0];
  int k = static_cast<int>(unit_double(rng) * e0.tau);
  if (k >= e0.tau) k = e0.tau - 1;
  std::vector<int> word{j0};
  while (static_cast<int>(word.size()) < depth) word.push_back(draw_next(T, rng, word));
  double x = code_word(s, word, false);
  if (level_out) *level_out = k;
  return x;
}

double forward_steps(const IntervalMap& map, double x, int k) {
  const Interval& amb = map.ambient();
  for (int i = 0; i < k; ++i) {
    x = map.apply(x);
    if (x > amb.hi && x < amb.hi + kEndpointTol) x = amb.hi;
    if (x < amb.lo && x > amb.lo - kEndpointTol) x = amb.lo;
  }
  return x;
}

// parallel_chunks does not transport exceptions; the first failure is stashed
// here and rethrown intact on the calling thread.
struct WorkerGuard {
  std::atomic<bool> failed{false};
  std::exception_ptr eptr;
  std::mutex mtx;

  void capture() {
    std::lock_guard<std::mutex> lk(mtx);
    if (!failed.exchange(true)) eptr = std::current_exception();
  }
  void rethrow() {
    if (failed.load() && eptr) std::rethrow_exception(eptr);
  }
};

struct OrbitStats {
  double sum = 0;
  long used = 0;
  long skipped = 0;
};

OrbitStats log_deriv_sum(const IntervalMap& map, double x0, long n, double delta_crit) {
  OrbitStats st;
  const UnimodalMap* um = dynamic_cast<const UnimodalMap*>(&map);
  const Interval& amb = map.ambient();
  double x = x0;
  for (long i = 0; i < n; ++i) {
    bool near = um ? std::fabs(x - um->critical_point()) < delta_crit
                   : std::fabs(map.derivative(x)) < kCriticalTol;
    if (near) {
      ++st.skipped;
    } else {
      double d = std::fabs(map.derivative(x));
      if (d < kCriticalTol) {
        ++st.skipped;
      } else {
        st.sum += std::log(d);
        ++st.used;
      }
    }
    x = map.apply(x);
    if (x > amb.hi && x < amb.hi + kEndpointTol) x = amb.hi;
    if (x < amb.lo && x > amb.lo - kEndpointTol) x = amb.lo;
    if (x > amb.hi || x < amb.lo)
      fail(Cond::OrbitEscapes, "orbit left the ambient interval at step " + std::to_string(i));
  }
  return st;
}

}  // namespace

SampleSet sample_lift(const InducingScheme& s, const TowerMeasure& mu, long n,
                      std::uint64_t seed, int depth, int threads) {
  if (n <= 0) fail(Cond::BadConfig, "sample count must be positive");
  if (depth < 1) fail(Cond::BadConfig, "descent depth must be >= 1");
  MeasureTables T = build_tables(s, mu);
  SampleSet set;
  set.seed = seed;
  set.descent_depth = depth;
  set.provenance = s.variant + " depth-" + std::to_string(T.depth) + " measure" +
                   (mu.note.empty() ? "" : "; " + mu.note);
  set.points.assign(static_cast<std::size_t>(n), 0.0);

  WorkerGuard guard;
  parallel_chunks(static_cast<std::size_t>(n), kSampleChunk,
                  static_cast<unsigned>(std::max(threads, 1)),
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    if (guard.failed.load()) return;
                    try {
                      for (std::size_t i = begin; i < end; ++i) {
                        std::mt19937_64 rng(derive_seed(seed, i));
                        int level = 0;
                        double x = descend_point(s, T, rng, depth, &level);
                        set.points[i] = forward_steps(*s.map, x, level);
                      }
                    } catch (...) {
                      guard.capture();
                    }
                  });
  guard.rethrow();
  return set;
}

LyapunovReport lyapunov(const InducingScheme& s, const TowerMeasure& mu, long orbit_len,
                        int n_orbits, std::uint64_t seed, double delta_crit, int threads) {
  if (orbit_len <= 0 || n_orbits <= 0) fail(Cond::BadConfig, "orbit length and count must be positive");
  SampleSet starts = sample_lift(s, mu, n_orbits, derive_seed(seed, 0x5ca1e), 12, threads);

  std::vector<double> means(n_orbits, 0.0);
  std::vector<long> skipped(n_orbits, 0);
  WorkerGuard guard;
  parallel_chunks(static_cast<std::size_t>(n_orbits), 1,
                  static_cast<unsigned>(std::max(threads, 1)),
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    if (guard.failed.load()) return;
                    try {
                      for (std::size_t i = begin; i < end; ++i) {
                        OrbitStats st = log_deriv_sum(*s.map, starts.points[i], orbit_len, delta_crit);
                        means[i] = st.used > 0 ? st.sum / st.used : 0.0;
                        skipped[i] = st.skipped;
                      }
                    } catch (...) {
                      guard.capture();
                    }
                  });
  guard.rethrow();

  LyapunovReport rep;
  rep.steps = orbit_len;
  long skip_total = 0;
  double sum = 0;
  for (int i = 0; i < n_orbits; ++i) {
    sum += means[i];
    skip_total += skipped[i];
  }
  rep.value = sum / n_orbits;
  rep.skipped = skip_total;
  double var = 0;
  for (int i = 0; i < n_orbits; ++i) var += (means[i] - rep.value) * (means[i] - rep.value);
  rep.se = n_orbits > 1 ? std::sqrt(var / (n_orbits - 1.0) / n_orbits) : 0.0;
  if (skip_total > kSkipBudget * static_cast<double>(orbit_len) * n_orbits)
    fail(Cond::NearCritical, "orbits spent " + std::to_string(skip_total) +
                                 " steps inside the critical neighborhood, above the resample budget");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& e : s.elements) {
    lo = std::min(lo, e.log_dF_inf / e.tau);
    hi = std::max(hi, e.log_dF_sup / e.tau);
  }
  rep.bracket_known = !s.elements.empty();
  rep.bracket_lo = lo;
  rep.bracket_hi = hi;
  rep.bracket_pass = rep.bracket_known && rep.value >= lo - 1e-3 && rep.value <= hi + 1e-3;
  return rep;
}

double lyapunov_orbit(const IntervalMap& map, double x0, long n, double delta_crit,
                      long* skipped) {
  if (n <= 0) fail(Cond::BadConfig, "orbit length must be positive");
  OrbitStats st = log_deriv_sum(map, x0, n, delta_crit);
  if (skipped) *skipped = st.skipped;
  if (st.used == 0) fail(Cond::NearCritical, "every orbit step fell in the critical neighborhood");
  if (st.skipped > kSkipBudget * n)
    fail(Cond::NearCritical, "orbit spent " + std::to_string(st.skipped) +
                                 " of " + std::to_string(n) + " steps near the critical point");
  return st.sum / st.used;
}

CorrelationFit correlation_fit(const InducingScheme& s, const TowerMeasure& mu,
                               const Observable& h1, const Observable& h2, int lag_max, long n,
                               std::uint64_t seed, int threads) {
  if (lag_max < 1) fail(Cond::BadConfig, "lag_max must be >= 1");
  if (n < 100) fail(Cond::BadConfig, "need at least 100 samples for correlation bars");
  if (!h1.f || !h2.f) fail(Cond::BadConfig, "observable has no evaluator");
  MeasureTables T = build_tables(s, mu);
  bool dyadic = stream_supported(s, T);
  if (!dyadic && lag_max > 40)
    fail(Cond::BadConfig, "real-orbit correlations are limited to lag_max <= 40");

  int L = lag_max + 1;
  std::size_t chunks = chunk_count(static_cast<std::size_t>(n), kSampleChunk);
  // per-chunk partial sums, combined in chunk order so worker count cannot
  // change the totals
  std::vector<std::vector<double>> part(chunks);
  WorkerGuard guard;
  parallel_chunks(
      static_cast<std::size_t>(n), kSampleChunk, static_cast<unsigned>(std::max(threads, 1)),
      [&](std::size_t ci, std::size_t begin, std::size_t end) {
        if (guard.failed.load()) return;
        try {
          std::vector<double>& acc = part[ci];
          acc.assign(3 * L + 2, 0.0);  // per lag: sum p, sum p^2, sum h1; then sum h2, sum h2^2
          std::vector<double> orbit(L);
          for (std::size_t i = begin; i < end; ++i) {
            std::uint64_t sd = derive_seed(seed, i);
            if (dyadic) {
              DyadicStream st(T, sd);
              for (int k = 0; k < L; ++k) {
                orbit[k] = st.x();
                if (k + 1 < L) st.step();
              }
            } else {
              std::mt19937_64 rng(sd);
              double x = descend_point(s, T, rng, 12, nullptr);
              for (int k = 0; k < L; ++k) {
                orbit[k] = x;
                if (k + 1 < L) x = forward_steps(*s.map, x, 1);
              }
            }
            double v2 = h2.f(orbit[0]);
            acc[3 * L] += v2;
            acc[3 * L + 1] += v2 * v2;
            for (int k = 0; k < L; ++k) {
              double v1 = h1.f(orbit[k]);
              double p = v1 * v2;
              acc[3 * k] += p;
              acc[3 * k + 1] += p * p;
              acc[3 * k + 2] += v1;
            }
          }
        } catch (...) {
          guard.capture();
        }
      });
  guard.rethrow();

  std::vector<double> tot(3 * L + 2, 0.0);
  for (std::size_t c = 0; c < chunks; ++c)
    for (std::size_t t = 0; t < tot.size(); ++t) tot[t] += part[c][t];

  CorrelationFit fit;
  fit.mean2 = tot[3 * L] / n;
  fit.mean1 = tot[2] / n;
  fit.lags.resize(L);
  fit.corr.resize(L);
  fit.se.resize(L);
  for (int k = 0; k < L; ++k) {
    fit.lags[k] = k;
    double mp = tot[3 * k] / n;
    double m1 = tot[3 * k + 2] / n;
    fit.corr[k] = mp - m1 * fit.mean2;
    double varp = std::max(0.0, tot[3 * k + 1] / n - mp * mp);
    fit.se[k] = std::sqrt(varp / n);
  }

  std::vector<double> xs, ys;
  for (int k = 1; k < L; ++k)
    if (std::fabs(fit.corr[k]) > 3.0 * fit.se[k]) {
      xs.push_back(k);
      ys.push_back(std::log(std::fabs(fit.corr[k])));
    }
  fit.fit_lags = static_cast<int>(xs.size());
  if (fit.fit_lags == 0) {
    fit.all_noise = true;
    fit.pass = true;
    return fit;
  }
  if (fit.fit_lags < 2) {
    fit.pass = false;
    return fit;
  }
  LinFit lf = fit_linear(xs, ys);
  fit.theta = std::exp(lf.slope);
  fit.K = std::exp(lf.intercept);
  fit.fit_resid = lf.max_abs_residual;
  fit.pass = lf.ok() && fit.theta > 0 && fit.theta < 1;
  return fit;
}

CLTReport clt_test(const InducingScheme& s, const TowerMeasure& mu, const Observable& h, long n,
                   int m, std::uint64_t seed, int threads) {
  if (n < 64) fail(Cond::BadConfig, "block length must be >= 64");
  if (m < 16) fail(Cond::BadConfig, "need at least 16 blocks");
  if (!h.f) fail(Cond::BadConfig, "observable has no evaluator");
  MeasureTables T = build_tables(s, mu);
  bool dyadic = stream_supported(s, T);
  long sub = n / 16;

  std::vector<double> block(m, 0.0);
  std::vector<double> coarse(static_cast<std::size_t>(m) * 16, 0.0);
  WorkerGuard guard;
  parallel_chunks(
      static_cast<std::size_t>(m), 4, static_cast<unsigned>(std::max(threads, 1)),
      [&](std::size_t, std::size_t begin, std::size_t end) {
        if (guard.failed.load()) return;
        try {
          for (std::size_t b = begin; b < end; ++b) {
            std::uint64_t sd = derive_seed(seed, b);
            double sum = 0, csub = 0;
            int slot = 0;
            if (dyadic) {
              DyadicStream st(T, sd);
              for (long i = 0; i < n; ++i) {
                double v = h.f(st.x());
                sum += v;
                csub += v;
                if ((i + 1) % sub == 0 && slot < 16) {
                  coarse[b * 16 + slot] = csub;
                  csub = 0;
                  ++slot;
                }
                if (i + 1 < n) st.step();
              }
            } else {
              std::mt19937_64 rng(sd);
              double x = descend_point(s, T, rng, 12, nullptr);
              for (long i = 0; i < n; ++i) {
                double v = h.f(x);
                sum += v;
                csub += v;
                if ((i + 1) % sub == 0 && slot < 16) {
                  coarse[b * 16 + slot] = csub;
                  csub = 0;
                  ++slot;
                }
                if (i + 1 < n) x = forward_steps(*s.map, x, 1);
              }
            }
            block[b] = sum;
          }
        } catch (...) {
          guard.capture();
        }
      });
  guard.rethrow();

  CLTReport rep;
  rep.n = n;
  rep.m = m;
  double grand = 0;
  for (double b : block) grand += b;
  rep.mean = grand / (static_cast<double>(n) * m);

  std::vector<double> z(m);
  double var = 0;
  for (int b = 0; b < m; ++b) {
    z[b] = (block[b] - n * rep.mean) / std::sqrt(static_cast<double>(n));
    var += z[b] * z[b];
  }
  rep.gamma = std::sqrt(var / (m - 1.0));

  double cvar = 0;
  std::size_t cN = coarse.size();
  for (std::size_t i = 0; i < cN; ++i) {
    double zc = (coarse[i] - sub * rep.mean) / std::sqrt(static_cast<double>(sub));
    cvar += zc * zc;
  }
  rep.gamma_coarse = std::sqrt(cvar / (cN - 1.0));
  rep.scale_ratio = rep.gamma_coarse > 0 ? rep.gamma / rep.gamma_coarse : 0.0;

  if (rep.gamma < kGammaFloor)
    fail(Cond::DegenerateVariance, "block variance " + fmt_g17(rep.gamma) +
                                       " is numerically zero; the observable behaves as a coboundary");
  if (rep.scale_ratio < kScaleRatioFloor)
    fail(Cond::DegenerateVariance,
         "normalized spread shrinks from " + fmt_g17(rep.gamma_coarse) + " at blocks of " +
             std::to_string(sub) + " to " + fmt_g17(rep.gamma) + " at " + std::to_string(n) +
             "; the observable behaves as a coboundary");

  std::sort(z.begin(), z.end());
  double ks = 0;
  for (int i = 0; i < m; ++i) {
    double F = normal_cdf(z[i] / rep.gamma);
    ks = std::max(ks, std::fabs(F - static_cast<double>(i) / m));
    ks = std::max(ks, std::fabs(static_cast<double>(i + 1) / m - F));
  }
  rep.ks = ks;
  return rep;
}

Observable make_observable(const std::string& name) {
  if (name == "x") return {"x", [](double x) { return x; }};
  if (name == "x-centered") return {"x-centered", [](double x) { return x - 0.5; }};
  if (name == "cos2pi") return {"cos2pi", [](double x) { return std::cos(2 * kPi * x); }};
  if (name == "sin2pi") return {"sin2pi", [](double x) { return std::sin(2 * kPi * x); }};
  if (name == "coboundary-sin")
    // sin(2 pi f x) - sin(2 pi x) for the doubling map, a closed-form coboundary
    return {"coboundary-sin",
            [](double x) { return std::sin(4 * kPi * x) - std::sin(2 * kPi * x); }};
  if (name == "constant") return {"constant", [](double) { return 1.0; }};
  fail(Cond::BadConfig, "unknown observable '" + name +
                            "'; available: x, x-centered, cos2pi, sin2pi, coboundary-sin, constant");
}

std::string samples_to_csv(const SampleSet& set) {
  std::ostringstream out;
  out << "x\n";
  for (double p : set.points) out << fmt_g17(p) << "\n";
  return out.str();
}

std::string correlation_to_csv(const CorrelationFit& fit) {
  std::ostringstream out;
  out << "lag,corr,se\n";
  for (std::size_t i = 0; i < fit.lags.size(); ++i)
    out << fit.lags[i] << "," << fmt_g17(fit.corr[i]) << "," << fmt_g17(fit.se[i]) << "\n";
  return out.str();
}

std::string clt_to_json(const CLTReport& rep) {
  std::ostringstream out;
  out << "{\"n\":" << rep.n << ",\"m\":" << rep.m << ",\"gamma\":" << fmt_g17(rep.gamma)
      << ",\"ks\":" << fmt_g17(rep.ks) << ",\"gamma_coarse\":" << fmt_g17(rep.gamma_coarse)
      << ",\"scale_ratio\":" << fmt_g17(rep.scale_ratio) << ",\"mean\":" << fmt_g17(rep.mean)
      << "}";
  return out.str();
}

}  // namespace thermoscheme
