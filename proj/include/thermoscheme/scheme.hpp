#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thermoscheme/common.hpp"
#include "thermoscheme/maps.hpp"

namespace thermoscheme {

// One basic interval J of the scheme with its inducing time and the branch
// word realizing f^tau|J. Derivative bounds are kept in log scale so that
// large tau cannot overflow.
struct BasicElement {
  int symbol = -1;
  Interval J{0, 0};
  int tau = 0;
  std::vector<int> branch_word;
  double log_dF_inf = 0;
  double log_dF_sup = 0;
  int level = -1;
};

// Per-level summary. Levels too large to materialize (the deepest refined
// dyadic level has 2^32 pieces) are carried here only.
struct LevelClass {
  int level = -1;
  int tau = 0;
  std::uint64_t count = 0;
  double piece_len = 0;
  double total_len = 0;
  double log_dF = 0;
  bool uniform = true;
  bool materialized = true;
};

class InducingScheme {
 public:
  std::shared_ptr<const IntervalMap> map;
  std::string variant;  // doubling-plain | doubling-refined | first-return | unimodal
  Interval W{0, 0};     // hull of the element union
  Interval base{0, 0};  // common image f^tau(J)
  std::optional<Interval> base_A;
  std::vector<BasicElement> elements;  // sorted by (tau, J.lo); symbol == index
  std::vector<LevelClass> classes;     // covers every level, materialized or not
  int truncation = 0;
  bool fully_materialized = true;
  double unresolved_len = 0;  // base mass not resolved at the depth cap
  std::string tau_note;
  std::vector<std::pair<std::string, double>> params;

  int alphabet() const { return static_cast<int>(elements.size()); }
  int max_tau() const;
  std::uint64_t S_of(int n) const;
  double total_len() const;
  double hull_len() const { return W.length(); }
  int find_element(double x) const;  // symbol or -1
  void finalize();                   // sorts, assigns symbols, builds the lookup index

 private:
  std::vector<int> by_lo_;
};

InducingScheme build_doubling_scheme(const std::string& variant, int n_max);
InducingScheme build_first_return_scheme(std::shared_ptr<const IntervalMap> map, Interval base,
                                         int depth);
InducingScheme build_unimodal_scheme(std::shared_ptr<const UnimodalMap> map, int tau_max);

// F(x) = f^tau(x) together with the symbol of the element containing x.
std::pair<double, int> induced_map(const InducingScheme& s, double x);
double induced_log_dF(const InducingScheme& s, double x);

// Interval coded by a finite word of scheme symbols.
Interval cylinder_interval(const InducingScheme& s, const std::vector<int>& word);

// Point coded by the word; with periodic=true the word is repeated until the
// nested interval contracts below eps_code.
double code_word(const InducingScheme& s, const std::vector<int>& word, bool periodic = false);

struct SchemeReport {
  bool h1_pass = false;
  double h1_max_defect = 0;
  bool h2_pass = false;
  double h2_worst_ratio = 0;
  double c1 = 0, lambda1 = 0, lambda1_resid = 0;
  bool tail_pass = false;
  double c2 = 0, lambda2 = 0, distortion_max = 0;
  bool distortion_pass = false;
  double c3 = 0, c4 = 0, lambda3 = 0;
  std::map<int, std::uint64_t> S_counts;
  double gamma = 1, gamma_d = 1, gamma_resid = 0;
  std::vector<std::string> warnings;
};

SchemeReport verify_scheme(const InducingScheme& s, int sample_depth, std::uint64_t seed = 1234);

int compute_N0(const UnimodalMap& map, int cap);

struct StrongRegularReport {
  bool pass = false;
  int first_fail_k = -1;
  int N0 = -1;
  int M_bar = 0;
  double rho = 0;
  std::vector<std::pair<int, int>> tau_seq;  // (k, tau of the k-th induced return)
  double worst_margin = 0;                   // min over k of rho*k - budget sum
  std::string note;
};

StrongRegularReport strongly_regular_check(const UnimodalMap& map, const InducingScheme& s,
                                           int k_max, int M_bar, double rho);

struct TowerSlice {
  int symbol;
  int k;
  Interval image;
};
std::vector<TowerSlice> tower_slices(const InducingScheme& s, std::size_t max_slices = 1000000);

std::string scheme_to_json(const InducingScheme& s);
InducingScheme scheme_from_json(const std::string& text);

}  // namespace thermoscheme
