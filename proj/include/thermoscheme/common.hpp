#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace thermoscheme {

// Default tolerances shared across modules.
inline constexpr double kInverseTol = 1e-12;   // branch inverse round-trip
inline constexpr double kEndpointTol = 1e-9;   // element-onto-domain endpoint match
inline constexpr double kCodeTol = 1e-12;      // coded-point cylinder contraction
inline constexpr double kCriticalTol = 1e-8;   // |df| below this counts as critical
inline constexpr double kGapTol = 1e-9;        // allowed gap between branch domains

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool valid() const { return lo < hi; }
  // Branch domains are half-open (lo, hi]; ambient containment is closed.
  bool contains_oc(double x) const { return lo < x && x <= hi; }
  bool contains_cc(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o, double tol = 0.0) const {
    return lo - tol <= o.lo && o.hi <= hi + tol;
  }
};

inline Interval intersect(const Interval& a, const Interval& b) {
  return Interval{a.lo > b.lo ? a.lo : b.lo, a.hi < b.hi ? a.hi : b.hi};
}

// Named numerical conditions surfaced to callers and by the CLI (exit code 3,
// except BadConfig which maps to exit code 2).
enum class Cond {
  BadConfig,
  OutOfDomain,
  NearCritical,
  EmptyPreimage,
  NotMarkov,
  NoAlpha,
  Degenerate,
  NotInW,
  NoConvergence,
  CapExceeded,
  OrbitEscapes,
  TailNotExponential,
  DistortionUnbounded,
  DepthInfeasible,
  ZeroWeightCylinder,
  NoBracket,
  QDiverges,
  EntropyUnavailable,
  InvalidConstants,
  DegenerateVariance,
};

const char* cond_name(Cond c);

class Error : public std::runtime_error {
 public:
  Error(Cond cond, std::string msg, std::string hypothesis = "")
      : std::runtime_error(std::string(cond_name(cond)) + ": " + msg +
                           (hypothesis.empty() ? "" : " [condition " + hypothesis + "]")),
        cond_(cond),
        hypothesis_(std::move(hypothesis)) {}

  Cond cond() const { return cond_; }
  // Which (H*) / (P*) condition failed, when one applies; empty otherwise.
  const std::string& hypothesis() const { return hypothesis_; }

 private:
  Cond cond_;
  std::string hypothesis_;
};

[[noreturn]] inline void fail(Cond c, const std::string& msg, const std::string& hyp = "") {
  throw Error(c, msg, hyp);
}

// Ordinary least squares for y ~ intercept + slope * x.
struct LinFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
  std::size_t n = 0;
  bool ok() const { return n >= 2; }
};

LinFit fit_linear(const std::vector<double>& xs, const std::vector<double>& ys);

// Stable 17-significant-digit formatting; used everywhere numbers are written
// so that repeated runs produce byte-identical files.
std::string fmt_g17(double v);
std::string fmt_g17(long double v);

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives a per-stream seed so that sample i is independent of evaluation order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 1));
}

// Runs fn(chunk_index, begin, end) over [0, total) in fixed chunks. Chunk
// boundaries do not depend on the worker count, so per-chunk partial results
// combined in chunk order give identical totals for any number of workers.
void parallel_chunks(std::size_t total, std::size_t chunk, unsigned workers,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

inline std::size_t chunk_count(std::size_t total, std::size_t chunk) {
  return (total + chunk - 1) / chunk;
}

}  // namespace thermoscheme
