#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nsf/commands.hpp"
#include "nsf/config.hpp"
#include "nsf/constitutive.hpp"
#include "nsf/equilibrium.hpp"
#include "nsf/error.hpp"
#include "nsf/io.hpp"
#include "nsf/run.hpp"
#include "nsf/truncation.hpp"
#include "nsf/verify.hpp"

namespace py = pybind11;
using namespace nsf;

namespace {

py::array_t<double> to_array(const ScalarField& f) {
  py::array_t<double> a({f.py(), f.px()});
  auto m = a.mutable_unchecked<2>();
  for (int j = 0; j < f.py(); ++j)
    for (int i = 0; i < f.px(); ++i) m(j, i) = f(i, j);
  return a;
}

SymTensor tensor(const std::array<double, 3>& d) { return {d[0], d[1], d[2]}; }

StressLaw make_stress(double p, const std::string& profile, double nu, double nu_lo, double nu_hi, double eps_d) {
  if (profile == "constant") return StressLaw(p, BoundedProfile::constant(nu), eps_d);
  if (profile == "rational") return StressLaw(p, BoundedProfile::rational(nu_lo, nu_hi), eps_d);
  throw ConfigError("stress profile must be constant or rational");
}

ConductivityLaw make_kappa(const std::string& profile, double value, double lo, double hi) {
  if (profile == "constant") return ConductivityLaw::constant(value);
  if (profile == "rational") return ConductivityLaw::rational(lo, hi);
  throw ConfigError("kappa profile must be constant or rational");
}

SimulationConfig config_from(const std::string& text, const std::vector<std::string>& overrides) {
  RawConfig raw = parse_config(text);
  for (const auto& o : overrides) apply_override(raw, o);
  return to_simulation_config(raw);
}

py::dict result_dict(const RunResult& r) {
  py::dict d;
  d["status"] = static_cast<int>(r.status);
  d["message"] = r.message;
  d["failed_invariant"] = r.failed_invariant;
  d["failed_step"] = r.failed_step;
  d["steps"] = r.steps;
  d["mu"] = r.mu;
  d["columns"] = record_columns();
  std::vector<std::vector<double>> rows;
  for (const auto& rec : r.records) rows.push_back(record_values(rec));
  d["records"] = rows;
  py::dict inv;
  for (const auto& [name, c] : r.invariants) {
    py::dict e;
    e["passed"] = c.passed;
    e["worst"] = c.worst;
    e["limit"] = c.limit;
    inv[name.c_str()] = e;
  }
  d["invariants"] = inv;
  if (r.final_state) {
    d["final_coeffs"] = r.final_state->velocity.coeffs;
    d["final_theta"] = to_array(r.final_state->theta);
    d["final_t"] = r.final_state->t;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Galerkin Navier-Stokes-Fourier simulator core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvariantBreach>(m, "InvariantBreach", PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  m.def(
      "stress",
      [](std::array<double, 3> d, double theta, double p, const std::string& profile, double nu, double nu_lo,
         double nu_hi, double eps_d) {
        const SymTensor s = stress(make_stress(p, profile, nu, nu_lo, nu_hi, eps_d), theta, tensor(d));
        return std::array<double, 3>{s.xx, s.xy, s.yy};
      },
      py::arg("d"), py::arg("theta"), py::arg("p") = 2.2, py::arg("profile") = "constant", py::arg("nu") = 1.0,
      py::arg("nu_lo") = 1.0, py::arg("nu_hi") = 2.0, py::arg("eps_d") = 0.0,
      "Stress for the symmetric tensor d = (xx, xy, yy); returns (xx, xy, yy).");
  m.def(
      "stress_power",
      [](std::array<double, 3> d, double theta, double p, const std::string& profile, double nu, double nu_lo,
         double nu_hi, double eps_d) {
        return stress_power(make_stress(p, profile, nu, nu_lo, nu_hi, eps_d), theta, tensor(d));
      },
      py::arg("d"), py::arg("theta"), py::arg("p") = 2.2, py::arg("profile") = "constant", py::arg("nu") = 1.0,
      py::arg("nu_lo") = 1.0, py::arg("nu_hi") = 2.0, py::arg("eps_d") = 0.0);
  m.def(
      "conductivity",
      [](double theta, const std::string& profile, double value, double lo, double hi) {
        return conductivity(make_kappa(profile, value, lo, hi), theta);
      },
      py::arg("theta"), py::arg("profile") = "constant", py::arg("value") = 1.0, py::arg("lo") = 1.0,
      py::arg("hi") = 2.0);

  m.def("t_k", &t_k, py::arg("k"), py::arg("z"));
  m.def("g_k", &g_k, py::arg("k"), py::arg("s"));
  m.def("t_k_delta", &t_k_delta, py::arg("k"), py::arg("delta"), py::arg("z"));
  m.def("t_k_delta_d1", &t_k_delta_d1, py::arg("k"), py::arg("delta"), py::arg("z"));
  m.def("t_k_delta_d2", &t_k_delta_d2, py::arg("k"), py::arg("delta"), py::arg("z"));
  m.def("g_continuity", &g_continuity, py::arg("M"), py::arg("theta"), py::arg("theta_hat"));
  m.def(
      "kirchhoff",
      [](double s, double s_ref, const std::string& profile, double value, double lo, double hi) {
        return kirchhoff(make_kappa(profile, value, lo, hi), s, s_ref);
      },
      py::arg("s"), py::arg("s_ref") = 1.0, py::arg("profile") = "constant", py::arg("value") = 1.0,
      py::arg("lo") = 1.0, py::arg("hi") = 2.0);
  m.def(
      "kirchhoff_inverse",
      [](double u, double s_ref, const std::string& profile, double value, double lo, double hi) {
        return kirchhoff_inverse(make_kappa(profile, value, lo, hi), u, s_ref);
      },
      py::arg("u"), py::arg("s_ref") = 1.0, py::arg("profile") = "constant", py::arg("value") = 1.0,
      py::arg("lo") = 1.0, py::arg("hi") = 2.0);

  m.def(
      "equilibrium",
      [](int nx, int ny, const std::string& left, const std::string& right, const std::string& bottom,
         const std::string& top, const std::string& profile, double value, double lo, double hi) {
        const Grid grid(nx, ny);
        EquilibriumProblem pb;
        pb.grid = &grid;
        pb.law = make_kappa(profile, value, lo, hi);
        pb.boundary = {SideData::parse(left), SideData::parse(right), SideData::parse(bottom), SideData::parse(top)};
        const auto sol = solve_theta_hat(pb);
        return to_array(sol.theta_hat);
      },
      py::arg("nx"), py::arg("ny"), py::arg("left"), py::arg("right"), py::arg("bottom"), py::arg("top"),
      py::arg("profile") = "constant", py::arg("value") = 1.0, py::arg("lo") = 1.0, py::arg("hi") = 2.0,
      "Equilibrium temperature on the full (ny+2) x (nx+2) node array, rows indexed by y.");

  m.def(
      "run",
      [](const std::string& config_text, const std::vector<std::string>& overrides) {
        const SimulationConfig cfg = config_from(config_text, overrides);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(cfg);
        }
        return result_dict(r);
      },
      py::arg("config_text"), py::arg("overrides") = std::vector<std::string>{},
      "Runs a simulation from key=value config text; returns records, invariants and the final state.");

  m.def(
      "verify",
      [](const std::string& scope, bool inject_broken_law) {
        VerifyOptions opts;
        opts.inject_broken_law = inject_broken_law;
        py::list rows;
        for (const auto& r : verify_scope(scope, opts)) {
          py::dict d;
          d["suite"] = r.suite;
          d["check"] = r.check;
          d["passed"] = r.passed;
          d["value"] = r.value;
          d["limit"] = r.limit;
          rows.append(d);
        }
        return rows;
      },
      py::arg("scope") = "all", py::arg("inject_broken_law") = false);

  m.def(
      "parse_config",
      [](const std::string& text) {
        const RawConfig raw = parse_config(text);
        to_simulation_config(raw);
        return raw.values();
      },
      py::arg("text"), "Parses and validates config text; returns the key/value map.");
  m.def("config_hash", [](const std::string& text) { return fnv1a64(parse_config(text).canonical()); });
  m.def("record_columns", &record_columns);
}
