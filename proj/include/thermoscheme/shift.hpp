#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "thermoscheme/common.hpp"

namespace thermoscheme {

// Potential on the full one-sided shift over a truncated alphabet.  The
// evaluator reads a window of `depth` leading symbols; callers extend words
// cyclically when a window runs past the end, which matches evaluating at the
// coded periodic representative of the word.
struct ShiftPotential {
  int alphabet = 0;
  int depth = 1;
  std::vector<int> tau;      // inducing time per symbol, 1 when not scheme-backed
  double tail_weight = 0.0;  // sum of exp(phi) over symbols cut by the truncation
  std::function<double(const std::vector<int>&)> eval_window;
};

double potential_value(const ShiftPotential& pot, const std::vector<int>& word,
                       std::size_t start);
double potential_cycle_sum(const ShiftPotential& pot, const std::vector<int>& word);

ShiftPotential first_symbol_potential(const std::vector<double>& values);

// Largest oscillation of the potential over sampled continuations of depth-n
// words.  Zero once n reaches the evaluator's memory depth.
double variation(const ShiftPotential& pot, int n, int samples = 2000,
                 std::uint64_t seed = 7777);

struct PressureEstimate {
  int n = 0;
  double estimate = 0.0;
};

// Successive-ratio diagnostics log Z_{n+1}(a) - log Z_n(a) of the periodic
// orbit sums through base_symbol, one entry per n = 1..n_max.
std::vector<PressureEstimate> gurevich_pressure_orbits(const ShiftPotential& pot, int n_max,
                                                       int base_symbol, int threads = 1);

// Log leading eigenvalue of the transition-weighted operator on depth-d
// cylinder states, by two-sided power iteration.
double gurevich_pressure_operator(const ShiftPotential& pot, int depth, int threads = 1);

struct CylinderMeasure {
  int depth = 1;
  int alphabet = 0;
  std::vector<std::pair<std::vector<int>, double>> weights;  // lexicographic by word
  double P_G = 0.0;
  double C1 = 1.0;
  double C2 = 1.0;
  double leakage = 0.0;
  double consistency_defect = 0.0;

  double weight_of(const std::vector<int>& word) const;
};

CylinderMeasure gibbs_weights(const ShiftPotential& pot, int depth, int threads = 1);

// Audits weight([w]) / exp(-n P_G + Phi_n(rep)) over depth-n cylinders and
// stores the extremes back into the measure.
std::pair<double, double> gibbs_constants(CylinderMeasure& m, const ShiftPotential& pot,
                                          int audit_depth, std::uint64_t seed = 4242);

std::string cylinder_measure_to_csv(const CylinderMeasure& m);

}  // namespace thermoscheme
