#pragma once

#include <memory>
#include <string>
#include <vector>

#include "thermoscheme/common.hpp"

namespace thermoscheme {

// One monotone branch of an interval map. Domains follow the half-open
// (lo, hi] convention; images are stored sorted regardless of orientation.
struct Branch {
  Interval domain;
  int dir = +1;  // +1 increasing, -1 decreasing
  std::function<double(double)> forward;
  std::function<double(double)> derivative;
  std::function<double(double)> inverse;  // defined on image
  Interval image;

  bool contains(double x) const { return domain.contains_oc(x); }
};

// Interval map with exact branch structure. Evaluation dispatches on branch
// domains except where a subclass supplies a global formula (unimodal family).
class IntervalMap {
 public:
  virtual ~IntervalMap() = default;

  const Interval& ambient() const { return ambient_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const std::string& kind() const { return kind_; }

  // Index of the branch whose half-open domain contains x, or -1.
  int branch_index(double x) const;

  virtual double apply(double x) const;       // f(x), one step
  virtual double derivative(double x) const;  // df(x)

 protected:
  IntervalMap(std::string kind, Interval ambient) : kind_(std::move(kind)), ambient_(ambient) {}
  void set_branches(std::vector<Branch> b);
  void check_branch_invariants() const;

  std::string kind_;
  Interval ambient_;
  std::vector<Branch> branches_;
};

class PiecewiseMap : public IntervalMap {
 public:
  PiecewiseMap(std::string kind, Interval ambient, std::vector<Branch> branches,
               std::vector<std::pair<std::string, double>> params = {});
  const std::vector<std::pair<std::string, double>>& params() const { return params_; }

 private:
  std::vector<std::pair<std::string, double>> params_;
};

// Quadratic family f_a(x) = 1 - a x^2 on [-beta, beta], where beta is chosen
// so that the endpoint -beta is fixed. Critical point 0 of order 2.
class UnimodalMap : public IntervalMap {
 public:
  explicit UnimodalMap(double a);

  double a() const { return a_; }
  double beta() const { return beta_; }
  double critical_point() const { return 0.0; }
  double order() const { return 2.0; }

  double apply(double x) const override;
  double derivative(double x) const override;

  // The orientation-reversing interior fixed point (positive root of
  // a x^2 + x - 1 = 0); throws NoAlpha when |f'(alpha)| <= 1.
  double alpha() const;

 private:
  double a_ = 0.0;
  double beta_ = 0.0;
};

std::shared_ptr<IntervalMap> make_doubling();
std::shared_ptr<IntervalMap> make_tent(double slope);
std::shared_ptr<UnimodalMap> make_quadratic(double a);

// JSON descriptor round-trip: {"kind", "params", "branches":[{"lo","hi","dir"}]}.
std::string map_to_json(const IntervalMap& map);
std::shared_ptr<IntervalMap> map_from_json(const std::string& text);

double eval(const IntervalMap& map, double x, int n);
std::vector<double> log_deriv_orbit(const IntervalMap& map, double x, int n);
Interval inverse_branch_compose(const IntervalMap& map, const std::vector<int>& word,
                                Interval target);

}  // namespace thermoscheme
