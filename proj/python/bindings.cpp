#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "jjlab/config.hpp"
#include "jjlab/errors.hpp"
#include "jjlab/harness.hpp"
#include "jjlab/integral.hpp"
#include "jjlab/kernels.hpp"
#include "jjlab/model.hpp"
#include "jjlab/spectral.hpp"

namespace py = pybind11;
using namespace jjlab;

namespace {

JunctionSpec junction(const std::string& kind, double length, double alpha, double epsilon, double lambda_taper) {
  auto s = make_junction(junction_kind_from_string(kind), length);
  s.alpha = alpha;
  s.epsilon = epsilon;
  s.lambda_taper = lambda_taper;
  return s;
}

py::dict runs_to_dict(const std::vector<SolverRun>& runs) {
  py::dict out;
  for (const auto& r : runs) {
    py::list t, u, v;
    for (const auto& s : r.snapshots) {
      t.append(s.time);
      u.append(s.u);
      v.append(s.v);
    }
    py::dict d;
    d["t"] = t;
    d["u"] = u;
    d["v"] = v;
    out[py::str(r.name)] = d;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_jjlab, m) {
  m.doc() = "Josephson junction solvers";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<RegimeError>(m, "RegimeError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
  py::register_exception<SeriesTruncationError>(m, "SeriesTruncationError", PyExc_RuntimeError);
  py::register_exception<NonContractionError>(m, "NonContractionError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<RunFailure>(m, "RunFailure", PyExc_RuntimeError);

  py::class_<KernelParams>(m, "KernelParams")
      .def(py::init([](double a, double b, double beta, double epsilon) { return KernelParams{a, b, beta, epsilon}; }),
           py::arg("a"), py::arg("b"), py::arg("beta"), py::arg("epsilon"))
      .def_readwrite("a", &KernelParams::a)
      .def_readwrite("b", &KernelParams::b)
      .def_readwrite("beta", &KernelParams::beta)
      .def_readwrite("epsilon", &KernelParams::epsilon)
      .def("positive", &KernelParams::positive)
      .def("__repr__", [](const KernelParams& p) {
        return "KernelParams(a=" + format_number(p.a) + ", b=" + format_number(p.b) +
               ", beta=" + format_number(p.beta) + ", epsilon=" + format_number(p.epsilon) + ")";
      });

  py::class_<MappedKernel>(m, "MappedKernel")
      .def_readonly("params", &MappedKernel::params)
      .def_readonly("a_nonpositive", &MappedKernel::a_nonpositive)
      .def_readonly("b_nonpositive", &MappedKernel::b_nonpositive)
      .def("flagged", &MappedKernel::flagged);

  m.def("psge_to_integro", &psge_to_integro, py::arg("alpha"), py::arg("epsilon"));
  m.def("esjj_to_integro", &esjj_to_integro, py::arg("alpha"), py::arg("epsilon"), py::arg("lambda_taper"));

  m.def("eval_K", &eval_K, py::arg("x"), py::arg("t"), py::arg("params"), py::arg("quad_tol") = kDefaultQuadTol);
  m.def("eval_K_x", &eval_K_x, py::arg("x"), py::arg("t"), py::arg("params"), py::arg("quad_tol") = kDefaultQuadTol);
  m.def("K_bound", &K_bound, py::arg("x"), py::arg("t"), py::arg("params"));
  m.def("eval_theta", &eval_theta, py::arg("x"), py::arg("t"), py::arg("params"), py::arg("period_length"),
        py::arg("quad_tol") = kDefaultQuadTol);

  m.def(
      "eval_G",
      [](double x, double xi, double t, const std::string& kind, double length, double alpha, double epsilon,
         double lambda_taper, double series_tol) {
        return eval_G(x, xi, t, junction(kind, length, alpha, epsilon, lambda_taper), series_tol);
      },
      py::arg("x"), py::arg("xi"), py::arg("t"), py::arg("kind") = "ESJJ", py::arg("length") = 1.0,
      py::arg("alpha") = 1.0, py::arg("epsilon") = 0.1, py::arg("lambda_taper") = 0.0,
      py::arg("series_tol") = kDefaultSeriesTol);

  m.def("asymptotic_profile", &asymptotic_profile, py::arg("g1"), py::arg("g2"), py::arg("lambda_taper"),
        py::arg("length"), py::arg("x"));

  m.def(
      "normalize_config", [](const std::string& text) { return render(parse_config(text)); }, py::arg("text"),
      "Parses a config and renders it with every default made explicit.");
  m.def("config_keys", &config_keys);

  m.def(
      "solve",
      [](const std::string& text) {
        const auto cfg = parse_config(text);
        std::vector<SolverRun> runs;
        {
          py::gil_scoped_release release;
          runs = solve(cfg);
        }
        return runs_to_dict(runs);
      },
      py::arg("text"), "Runs the configured solvers; returns {solver: {t, u, v}}.");

  m.def(
      "run",
      [](const std::string& text, const std::filesystem::path& out_dir) {
        const auto cfg = parse_config(text);
        RunReport rep;
        {
          py::gil_scoped_release release;
          rep = run(cfg, out_dir);
        }
        return rep.artifacts;
      },
      py::arg("text"), py::arg("out_dir"), "Runs a config and writes CSV artifacts; returns their paths.");
}
