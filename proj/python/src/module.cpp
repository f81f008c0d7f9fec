#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ipinn/checks.hpp"
#include "ipinn/io.hpp"
#include "ipinn/runner.hpp"
#include "ipinn/uncertainty.hpp"

namespace py = pybind11;
using namespace ipinn;

namespace {

py::dict bundle_dict(const SolutionBundle& b) {
  py::dict d;
  d["x"] = b.x;
  d["t"] = b.t;
  d["u"] = b.u;
  d["fields"] = b.fields;
  d["epochs"] = b.epochs;
  d["box_violations"] = b.box_violations;
  py::list history;
  for (const LogEntry& e : b.history) {
    py::dict row;
    row["epoch"] = e.epoch;
    row["total"] = e.loss.total;
    row["mse_g"] = e.loss.mse_g;
    row["u_mm_min"] = e.loss.u_mm_min;
    row["u_mm_max"] = e.loss.u_mm_max;
    row["mse_0"] = e.loss.mse_0;
    row["mse_u"] = e.loss.mse_u;
    row["box_violations"] = e.box_violations;
    history.append(row);
  }
  d["history"] = history;
  return d;
}

// A config built from a built-in name or JSON text, then keyword overrides.
io::RunConfig make_config(const std::string& problem_or_json, const py::kwargs& overrides) {
  io::RunConfig c = problem_or_json.find('{') == std::string::npos
                        ? io::default_run_config(problem_or_json)
                        : io::parse_run_config(problem_or_json, "<python>");
  TrainingConfig& t = c.training;
  for (const auto& [key, value] : overrides) {
    const std::string k = py::str(key);
    if (k == "epochs") t.epochs = value.cast<long>();
    else if (k == "learning_rate") t.learning_rate = value.cast<double>();
    else if (k == "w_g") t.w_g = value.cast<double>();
    else if (k == "w_mm") t.w_mm = value.cast<double>();
    else if (k == "w_0") t.w_0 = value.cast<double>();
    else if (k == "w_u") t.w_u = value.cast<double>();
    else if (k == "seed") t.seed = value.cast<std::uint64_t>();
    else if (k == "log_every") t.log_every = value.cast<long>();
    else if (k == "space_points") t.space_points = value.cast<int>();
    else if (k == "time_points") t.time_points = value.cast<int>();
    else if (k == "normalize_umm") t.normalize_umm = value.cast<bool>();
    else if (k == "jobs") c.jobs = value.cast<int>();
    else if (k == "output") c.output = value.cast<std::string>();
    else if (k == "alpha_levels") c.alpha_levels = value.cast<std::vector<double>>();
    else throw ConfigError("unknown setting '" + k + "'");
  }
  io::validate(c);
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Interval and fuzzy physics-informed neural networks";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def("builtin_names", &builtin_names);

  m.def(
      "resolved_config",
      [](const std::string& problem, const py::kwargs& kw) {
        return io::to_json(make_config(problem, kw));
      },
      py::arg("problem"), "Resolved run config as JSON text.");

  m.def(
      "train",
      [](const std::string& problem, const py::kwargs& kw) {
        const io::RunConfig c = make_config(problem, kw);
        if (c.is_fuzzy()) throw ConfigError("use train_fuzzy for fuzzy problems");
        SolutionBundle b;
        {
          py::gil_scoped_release release;
          b = train(c.problem, c.training);
        }
        return bundle_dict(b);
      },
      py::arg("problem"),
      "Train a built-in problem (or a JSON config) and return grids, bounds and the log. "
      "Keyword overrides: epochs, learning_rate, w_g, w_mm, w_0, w_u, seed, log_every, "
      "space_points, time_points, normalize_umm.");

  m.def(
      "train_fuzzy",
      [](const std::string& problem, const py::kwargs& kw) {
        const io::RunConfig c = make_config(problem, kw);
        if (!c.is_fuzzy()) throw ConfigError("'" + c.problem_name + "' is not a fuzzy problem");
        FuzzySolution s;
        {
          py::gil_scoped_release release;
          s = run_fpinn(*c.fuzzy, c.alpha_levels, c.training, c.jobs);
        }
        py::list cuts;
        for (const CutResult& cut : s.cuts) {
          py::dict d;
          d["alpha"] = cut.alpha;
          d["seed"] = cut.seed;
          d["error"] = cut.error;
          d["bundle"] = cut.bundle ? py::object(bundle_dict(*cut.bundle)) : py::none();
          cuts.append(d);
        }
        return cuts;
      },
      py::arg("problem"));

  m.def(
      "run",
      [](const std::string& problem, const py::kwargs& kw) {
        const io::RunConfig c = make_config(problem, kw);
        runner::RunReport r;
        {
          py::gil_scoped_release release;
          r = runner::run_to_directory(c, nullptr);
        }
        py::dict d;
        d["output"] = r.output;
        d["diverged"] = r.diverged;
        d["message"] = r.message;
        return d;
      },
      py::arg("problem"), "Train and write the artifact directory, as `ipinn run`.");

  m.def(
      "check",
      [](int graphs, std::uint64_t seed, bool inject) {
        checks::AutodiffOptions o{graphs, seed, inject};
        auto results = checks::autodiff_suite(o);
        results.push_back(checks::fem_convergence());
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["suite"] = r.suite;
          d["cases"] = r.cases;
          d["max_error"] = r.max_error;
          d["threshold"] = r.threshold;
          d["seconds"] = r.seconds;
          d["pass"] = r.pass;
          out.append(d);
        }
        return out;
      },
      py::arg("graphs") = 100, py::arg("seed") = 1, py::arg("inject_gradient_bug") = false);

  m.def(
      "bar_combinations",
      [](int elements) {
        const runner::BarReference r = runner::bar_combinations(builtin_bar_1d(), elements);
        py::dict d;
        d["x"] = r.x;
        for (std::size_t i = 0; i < r.names.size(); ++i) d[py::str(r.names[i])] = r.curves[i];
        d["lower"] = r.lower;
        d["upper"] = r.upper;
        return d;
      },
      py::arg("elements") = 200, "FEM solutions of the bar for the four endpoint combinations.");

  m.def(
      "fd_nonlinear",
      [](const std::string& bound, int nodes) {
        const ProblemDefinition p = builtin_nonlinear_pde();
        if (bound != "lower" && bound != "upper") throw ConfigError("bound is lower or upper");
        const FieldFunction& k =
            bound == "lower" ? p.fields[0].bounds.lower() : p.fields[0].bounds.upper();
        oracle::FdSolution s;
        {
          py::gil_scoped_release release;
          s = oracle::fd_solve_nonlinear(oracle::from_field(k), oracle::FdGrid::make(nodes));
        }
        py::dict d;
        d["x"] = s.x;
        d["t"] = s.times;
        d["u"] = s.u;
        return d;
      },
      py::arg("bound") = "lower", py::arg("nodes") = 201,
      "Finite-difference solution of the nonlinear PDE with k at one bound.");

  py::class_<FuzzyNumber>(m, "FuzzyNumber")
      .def_static("triangular", &FuzzyNumber::triangular)
      .def_static("trapezoidal", &FuzzyNumber::trapezoidal)
      .def_static("gaussian", &FuzzyNumber::gaussian, py::arg("mean"), py::arg("width"),
                  py::arg("truncation") = 3.0)
      .def("membership", [](const FuzzyNumber& f, double x) { return membership(f, x); })
      .def("alpha_cut", [](const FuzzyNumber& f, double a) {
        const Interval i = alpha_cut(f, a);
        return std::pair{i.lower, i.upper};
      });
}
