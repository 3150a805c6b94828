#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "thermoscheme/maps.hpp"
#include "thermoscheme/run.hpp"
#include "thermoscheme/scheme.hpp"
#include "thermoscheme/shift.hpp"
#include "thermoscheme/stats.hpp"
#include "thermoscheme/thermo.hpp"

namespace py = pybind11;
using namespace thermoscheme;

namespace {

PotentialSpec spec_of(const std::string& tag, double t, double c) {
  PotentialSpec spec;
  spec.tag = tag;
  spec.t = t;
  spec.c = c;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Thermodynamic formalism for interval maps with inducing schemes.";
  m.attr("__version__") = "0.1.0";

  py::register_exception<Error>(m, "SchemeError");

  py::class_<InducingScheme>(m, "InducingScheme")
      .def_readonly("variant", &InducingScheme::variant)
      .def_readonly("truncation", &InducingScheme::truncation)
      .def_readonly("tau_note", &InducingScheme::tau_note)
      .def_readonly("fully_materialized", &InducingScheme::fully_materialized)
      .def_property_readonly("alphabet", &InducingScheme::alphabet)
      .def_property_readonly("max_tau", &InducingScheme::max_tau)
      .def_property_readonly("total_len", &InducingScheme::total_len)
      .def("tau_of",
           [](const InducingScheme& s, int symbol) {
             if (symbol < 0 || symbol >= s.alphabet())
               throw py::index_error("symbol out of range");
             return s.elements[static_cast<std::size_t>(symbol)].tau;
           },
           py::arg("symbol"))
      .def("element_interval",
           [](const InducingScheme& s, int symbol) {
             if (symbol < 0 || symbol >= s.alphabet())
               throw py::index_error("symbol out of range");
             const Interval& J = s.elements[static_cast<std::size_t>(symbol)].J;
             return py::make_tuple(J.lo, J.hi);
           },
           py::arg("symbol"))
      .def("__repr__", [](const InducingScheme& s) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "<InducingScheme %s alphabet=%d max_tau=%d>",
                      s.variant.c_str(), s.alphabet(), s.max_tau());
        return std::string(buf);
      });

  py::class_<TowerMeasure>(m, "TowerMeasure")
      .def_readonly("Q", &TowerMeasure::Q)
      .def_readonly("P_used", &TowerMeasure::P_used)
      .def_readonly("p4_pass", &TowerMeasure::p4_pass)
      .def_readonly("p4_theta", &TowerMeasure::p4_theta)
      .def_readonly("note", &TowerMeasure::note)
      .def_property_readonly("P_G", [](const TowerMeasure& mu) { return mu.nu.P_G; })
      .def_property_readonly("depth", [](const TowerMeasure& mu) { return mu.nu.depth; })
      .def_property_readonly("weights",
                             [](const TowerMeasure& mu) {
                               py::list out;
                               for (const auto& [word, w] : mu.nu.weights) {
                                 py::tuple t(word.size());
                                 for (std::size_t i = 0; i < word.size(); ++i) t[i] = word[i];
                                 out.append(py::make_tuple(t, w));
                               }
                               return out;
                             })
      .def("__repr__", [](const TowerMeasure& mu) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "<TowerMeasure Q=%.6g P=%.6g depth=%d>", mu.Q, mu.P_used,
                      mu.nu.depth);
        return std::string(buf);
      });

  m.def(
      "build_preset",
      [](const std::string& name) {
        RunConfig cfg;
        apply_preset(cfg, name);
        return build_scheme(cfg);
      },
      py::arg("name"),
      "Scheme for a named preset: doubling-plain, doubling-refined, unimodal-a2eps, "
      "first-return-doubling.");
  m.def("build_doubling_scheme", &build_doubling_scheme, py::arg("variant"), py::arg("n_max"));
  m.def(
      "build_unimodal_scheme",
      [](double a, int tau_max) { return build_unimodal_scheme(make_quadratic(a), tau_max); },
      py::arg("a"), py::arg("tau_max"));
  m.def(
      "build_first_return_scheme",
      [](double lo, double hi, int depth) {
        return build_first_return_scheme(make_doubling(), Interval{lo, hi}, depth);
      },
      py::arg("lo"), py::arg("hi"), py::arg("depth"),
      "First-return scheme of the doubling map on [lo, hi].");

  m.def(
      "verify_scheme",
      [](const InducingScheme& s, int sample_depth, std::uint64_t seed) {
        SchemeReport r = verify_scheme(s, sample_depth, seed);
        py::dict d;
        d["h1_pass"] = r.h1_pass;
        d["h1_max_defect"] = r.h1_max_defect;
        d["h2_pass"] = r.h2_pass;
        d["lambda1"] = r.lambda1;
        d["lambda3"] = r.lambda3;
        d["gamma"] = r.gamma;
        d["tail_pass"] = r.tail_pass;
        d["distortion_max"] = r.distortion_max;
        d["distortion_pass"] = r.distortion_pass;
        py::dict sc;
        for (const auto& [n, cnt] : r.S_counts) sc[py::int_(n)] = cnt;
        d["S_counts"] = sc;
        d["warnings"] = r.warnings;
        return d;
      },
      py::arg("scheme"), py::arg("sample_depth") = 3, py::arg("seed") = 1234);

  m.def(
      "pressure_root",
      [](const InducingScheme& s, const std::string& tag, double t, double c, int depth,
         int threads) {
        PLReport r = compute_PL(s, induce(s, spec_of(tag, t, c)), depth, threads);
        py::dict d;
        d["value"] = r.value;
        d["residual"] = r.residual;
        d["bracket"] = py::make_tuple(r.bracket_lo, r.bracket_hi);
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("scheme"), py::arg("tag") = "phi_t", py::arg("t") = 1.0, py::arg("c") = 0.0,
      py::arg("depth") = 1, py::arg("threads") = 1);

  m.def(
      "equilibrium",
      [](const InducingScheme& s, const std::string& tag, double t, double c, int depth,
         bool force, int threads) {
        return equilibrium(s, spec_of(tag, t, c), depth, force, threads);
      },
      py::arg("scheme"), py::arg("tag") = "phi_t", py::arg("t") = 1.0, py::arg("c") = 0.0,
      py::arg("depth") = 1, py::arg("force") = false, py::arg("threads") = 1);

  m.def(
      "abramov_kac",
      [](const TowerMeasure& mu, const InducingScheme& s, const std::string& tag, double t,
         double c) {
        AbramovKac ak = verify_abramov_kac(mu, s, induce(s, spec_of(tag, t, c)));
        py::dict d;
        d["h_F"] = ak.h_F;
        d["Q"] = ak.Q;
        d["entropy_available"] = ak.entropy_available;
        d["h_f"] = ak.h_f;
        d["entropy_residual"] = ak.entropy_residual;
        d["phibar_int"] = ak.phibar_int;
        d["phi_int"] = ak.phi_int;
        d["kac_residual"] = ak.kac_residual;
        return d;
      },
      py::arg("measure"), py::arg("scheme"), py::arg("tag") = "phi_t", py::arg("t") = 1.0,
      py::arg("c") = 0.0);

  m.def(
      "pressure_curve",
      [](const InducingScheme& s, const std::vector<double>& grid, int depth, int threads) {
        PressureCurve pc = pressure_curve(s, grid, depth, threads);
        py::list rows;
        for (const auto& cs : pc.samples) {
          py::dict r;
          r["t"] = cs.t;
          r["P_t"] = cs.P_t;
          r["Q_t"] = cs.Q_t;
          r["C1"] = cs.C1;
          r["C2"] = cs.C2;
          r["leakage"] = cs.leakage;
          r["p4_theta"] = cs.p4_theta;
          r["ok"] = cs.ok;
          r["err"] = cs.err;
          rows.append(r);
        }
        py::dict d;
        d["samples"] = rows;
        d["monotone"] = pc.monotone;
        d["convex"] = pc.convex;
        d["st_bounds_pass"] = pc.st_bounds_pass;
        d["lambda1"] = pc.lambda1;
        d["lambda3"] = pc.lambda3;
        return d;
      },
      py::arg("scheme"), py::arg("t_grid"), py::arg("depth") = 1, py::arg("threads") = 1);

  m.def(
      "liftability",
      [](const InducingScheme& s) {
        LiftabilityReport r = check_liftability(s);
        py::dict d;
        d["verdict"] = r.verdict;
        d["Q_partial"] = r.Q_partial;
        py::list rows;
        for (const auto& [tau, mass] : r.contributions) rows.append(py::make_tuple(tau, mass));
        d["contributions"] = rows;
        d["note"] = r.note;
        return d;
      },
      py::arg("scheme"));

  m.def(
      "t_bounds",
      [](double lambda1, double lambda3, double gamma) {
        TBounds b = t_bounds(lambda1, lambda3, gamma);
        return py::make_tuple(b.t0, b.t1, b.degenerate);
      },
      py::arg("lambda1"), py::arg("lambda3"), py::arg("gamma"));

  m.def(
      "alpha", [](double a) { return make_quadratic(a)->alpha(); }, py::arg("a"),
      "Orientation-reversing fixed point of the quadratic family.");
  m.def(
      "critical_entry_time",
      [](double a, int cap) { return compute_N0(*make_quadratic(a), cap); }, py::arg("a"),
      py::arg("cap") = 10000,
      "First iterate at which the critical orbit enters (-alpha, alpha).");

  m.def(
      "sample_lift",
      [](const InducingScheme& s, const TowerMeasure& mu, long n, std::uint64_t seed, int depth,
         int threads) { return sample_lift(s, mu, n, seed, depth, threads).points; },
      py::arg("scheme"), py::arg("measure"), py::arg("n"), py::arg("seed"),
      py::arg("depth") = 12, py::arg("threads") = 1);

  m.def(
      "lyapunov",
      [](const InducingScheme& s, const TowerMeasure& mu, long orbit_len, int n_orbits,
         std::uint64_t seed, double delta_crit, int threads) {
        LyapunovReport r = lyapunov(s, mu, orbit_len, n_orbits, seed, delta_crit, threads);
        py::dict d;
        d["value"] = r.value;
        d["se"] = r.se;
        d["steps"] = r.steps;
        d["skipped"] = r.skipped;
        d["bracket"] = py::make_tuple(r.bracket_lo, r.bracket_hi);
        d["bracket_pass"] = r.bracket_pass;
        d["bracket_known"] = r.bracket_known;
        return d;
      },
      py::arg("scheme"), py::arg("measure"), py::arg("orbit_len"), py::arg("n_orbits"),
      py::arg("seed"), py::arg("delta_crit") = 1e-8, py::arg("threads") = 1);

  m.def(
      "correlations",
      [](const InducingScheme& s, const TowerMeasure& mu, const std::string& h1,
         const std::string& h2, int lag_max, long n, std::uint64_t seed, int threads) {
        Observable o1 = make_observable(h1);
        Observable o2 = h2.empty() ? o1 : make_observable(h2);
        CorrelationFit f = correlation_fit(s, mu, o1, o2, lag_max, n, seed, threads);
        py::dict d;
        d["lags"] = f.lags;
        d["corr"] = f.corr;
        d["se"] = f.se;
        d["theta"] = f.theta;
        d["K"] = f.K;
        d["fit_lags"] = f.fit_lags;
        d["all_noise"] = f.all_noise;
        d["pass"] = f.pass;
        return d;
      },
      py::arg("scheme"), py::arg("measure"), py::arg("observable") = "x-centered",
      py::arg("observable2") = "", py::arg("lag_max") = 10, py::arg("n") = 100000,
      py::arg("seed") = 20240817, py::arg("threads") = 1);

  m.def(
      "clt",
      [](const InducingScheme& s, const TowerMeasure& mu, const std::string& h, long n, int blocks,
         std::uint64_t seed, int threads) {
        CLTReport r = clt_test(s, mu, make_observable(h), n, blocks, seed, threads);
        py::dict d;
        d["n"] = r.n;
        d["m"] = r.m;
        d["gamma"] = r.gamma;
        d["ks"] = r.ks;
        d["gamma_coarse"] = r.gamma_coarse;
        d["scale_ratio"] = r.scale_ratio;
        d["mean"] = r.mean;
        return d;
      },
      py::arg("scheme"), py::arg("measure"), py::arg("observable") = "x-centered",
      py::arg("block_len") = 16384, py::arg("blocks") = 1000, py::arg("seed") = 20240817,
      py::arg("threads") = 1);

  m.def("observables", [] {
    return std::vector<std::string>{"x",      "x-centered",     "cos2pi",
                                    "sin2pi", "coboundary-sin", "constant"};
  });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = run_command(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"),
      "In-process CLI dispatch; returns (exit_code, stdout, stderr).");
}
