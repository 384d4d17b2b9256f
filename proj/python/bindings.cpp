#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "sphflow/coefficients.hpp"
#include "sphflow/config.hpp"
#include "sphflow/harness.hpp"

namespace py = pybind11;
using namespace sphflow;

namespace {

py::dict validate_config(const std::string& path) {
  const auto sc = scenario_from_config(Config::parse_file(path));
  const auto summary = validate_scenario(sc);
  py::dict out;
  out["pass"] = summary.pass();
  out["model_pass"] = summary.model_report.pass();
  out["hypotheses_pass"] = summary.hypothesis_report.pass();
  out["dimension_bounds"] = summary.dimension_bounds;
  out["alpha_admissible"] = summary.alpha_admissible;
  out["growth_envelope"] = summary.growth_envelope;
  out["text"] = summary.to_text();
  return out;
}

py::dict simulate_config(const std::string& path, const std::string& out_dir) {
  const auto sc = scenario_from_config(Config::parse_file(path));
  const auto res = simulate_to_dir(sc, out_dir);
  py::dict out;
  out["dir"] = res.dir;
  out["steps"] = res.run.steps;
  out["aborted"] = res.run.aborted;
  out["abort_reason"] = res.run.abort_reason;
  out["final_time"] = res.run.final_state.time;
  out["records"] = res.run.records.size();
  return out;
}

py::dict refine_config(const std::string& path, const std::string& out_dir) {
  const auto rep = run_refinement(Config::parse_file(path), out_dir);
  py::dict out;
  out["pass"] = rep.pass();
  py::list levels;
  for (const auto& ls : rep.per_level) {
    py::dict d;
    d["level"] = ls.level;
    d["epsilon"] = ls.epsilon;
    d["R"] = ls.R;
    d["delta"] = ls.delta;
    d["K"] = ls.K;
    d["steps"] = ls.steps;
    d["aborted"] = ls.aborted;
    levels.append(d);
  }
  out["per_level"] = levels;
  py::list flags;
  for (const auto& f : rep.flags) {
    py::dict d;
    d["name"] = f.name;
    d["pass"] = f.pass;
    d["detail"] = f.detail;
    flags.append(d);
  }
  out["flags"] = flags;
  out["residual_rows"] = rep.residuals.size();
  out["distance_rows"] = rep.distances.size();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Radial compressible-flow simulator with density-dependent "
            "viscosity: admissibility helpers and configuration-driven "
            "simulation, validation and refinement entry points.";

  m.def("v1", &v1, py::arg("m"), py::arg("dim"),
        "Lower root of the admissibility window for moment exponent m.");
  m.def("v2", &v2, py::arg("m"), py::arg("dim"),
        "Upper root of the admissibility window for moment exponent m.");
  m.def("admissible_alpha",
        py::overload_cast<double, double, double, int>(&admissible_alpha),
        py::arg("alpha"), py::arg("nu1"), py::arg("nu2"), py::arg("dim"),
        "Whether the regularization exponent alpha is admissible for the "
        "given trace-bound constants in the given dimension.");
  m.def("check_dimension_bounds", &check_dimension_bounds, py::arg("nu1"),
        py::arg("nu2"), py::arg("dim"),
        "Whether (nu1, nu2) lie inside the dimension-dependent window.");
  m.def("validate_config", &validate_config, py::arg("config_path"),
        "Validate the scenario described by a configuration file; returns a "
        "dict of per-family pass flags and the full text report.");
  m.def("simulate_config", &simulate_config, py::arg("config_path"),
        py::arg("out_dir"),
        "Run the scenario and write diagnostics.csv plus snapshots under "
        "out_dir; returns a dict summarizing the run.");
  m.def("refine_config", &refine_config, py::arg("config_path"),
        py::arg("out_dir"),
        "Run the full refinement ladder and write per-level directories, "
        "residuals.csv and report.json under out_dir; returns a dict "
        "summarizing levels, flags and row counts.");
}
