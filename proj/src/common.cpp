#include "thermoscheme/common.hpp"

#include <algorithm>
#include <atomic>

namespace thermoscheme {

const char* cond_name(Cond c) {
  switch (c) {
    case Cond::BadConfig: return "BadConfig";
    case Cond::OutOfDomain: return "OutOfDomain";
    case Cond::NearCritical: return "NearCritical";
    case Cond::EmptyPreimage: return "EmptyPreimage";
    case Cond::NotMarkov: return "NotMarkov";
    case Cond::NoAlpha: return "NoAlpha";
    case Cond::Degenerate: return "Degenerate";
    case Cond::NotInW: return "NotInW";
    case Cond::NoConvergence: return "NoConvergence";
    case Cond::CapExceeded: return "CapExceeded";
    case Cond::OrbitEscapes: return "OrbitEscapes";
    case Cond::TailNotExponential: return "TailNotExponential";
    case Cond::DistortionUnbounded: return "DistortionUnbounded";
    case Cond::DepthInfeasible: return "DepthInfeasible";
    case Cond::ZeroWeightCylinder: return "ZeroWeightCylinder";
    case Cond::NoBracket: return "NoBracket";
    case Cond::QDiverges: return "QDiverges";
    case Cond::EntropyUnavailable: return "EntropyUnavailable";
    case Cond::InvalidConstants: return "InvalidConstants";
    case Cond::DegenerateVariance: return "DegenerateVariance";
  }
  return "Unknown";
}

LinFit fit_linear(const std::vector<double>& xs, const std::vector<double>& ys) {
  LinFit f;
  f.n = std::min(xs.size(), ys.size());
  if (f.n < 2) return f;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / double(f.n), my = sy / double(f.n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0) return LinFit{};
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < f.n; ++i) {
    const double r = ys[i] - (f.intercept + f.slope * xs[i]);
    f.max_abs_residual = std::max(f.max_abs_residual, std::abs(r));
  }
  return f;
}

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_g17(long double v) { return fmt_g17(double(v)); }

void parallel_chunks(std::size_t total, std::size_t chunk, unsigned workers,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (total == 0) return;
  const std::size_t n_chunks = chunk_count(total, chunk);
  if (workers <= 1 || n_chunks <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c)
      fn(c, c * chunk, std::min(total, (c + 1) * chunk));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      fn(c, c * chunk, std::min(total, (c + 1) * chunk));
    }
  };
  const unsigned n_threads = std::min<std::size_t>(workers, n_chunks);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace thermoscheme
