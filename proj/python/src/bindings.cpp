#include "dcreact/dc_time.hpp"
#include "dcreact/fd_ops.hpp"
#include "dcreact/harness.hpp"
#include "dcreact/study_config.hpp"
#include "dcreact/trajectory.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <sstream>

namespace py = pybind11;
using namespace dcreact;

namespace {

std::vector<std::pair<std::string, std::string>> as_pairs(const std::vector<Rational>& values) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& v : values) {
    std::ostringstream n, d;
    n << numerator(v);
    d << denominator(v);
    out.emplace_back(n.str(), d.str());
  }
  return out;
}

Eigen::MatrixXd stack(std::span<const DofVector> states) {
  if (states.empty()) return {};
  Eigen::MatrixXd out(static_cast<Eigen::Index>(states.size()), states.front().size());
  for (std::size_t n = 0; n < states.size(); ++n) out.row(static_cast<Eigen::Index>(n)) = states[n].transpose();
  return out;
}

std::string bc_name(BoundaryCondition bc) {
  return bc == BoundaryCondition::HomogeneousDirichlet ? "dirichlet" : "neumann";
}

/// One integrated trajectory together with the problem and space it lives on.
struct Run {
  Run(const std::string& problem_name, int order, int N, int n_cells, std::optional<double> T, double abs_tol,
      int max_iter)
      : problem(make_problem(problem_name)),
        space(Mesh1D(problem.left, problem.right, n_cells), problem.J, problem.bc) {
    NewtonConfig newton;
    newton.abs_tol = abs_tol;
    newton.max_iter = max_iter;
    final_time = T ? *T : problem.default_T;
    py::gil_scoped_release release;
    result = run_dc(order, problem, space, TimeGrid(final_time, N), newton);
  }

  ProblemSpec problem;
  FemSpace space;
  double final_time = 0.0;
  DcRun result;
};

py::dict row_dict(const ConvergenceRow& r) {
  py::dict d;
  d["order"] = r.order;
  d["N"] = r.N;
  d["error"] = r.error;
  d["squared_error"] = r.squared_error;
  d["observed_order"] = r.observed_order;
  d["observed_order_of_square"] = r.observed_order_squared;
  d["solves"] = r.solves;
  d["wall_time"] = r.wall_time;
  d["failed"] = r.failed;
  d["floor_limited"] = r.floor_limited;
  d["note"] = r.note;
  return d;
}

py::dict report_dict(const ConvergenceReport& report) {
  py::dict d;
  d["problem"] = report.problem;
  d["reference"] = report.reference;
  d["n_cells"] = report.n_cells;
  d["T"] = report.T;
  d["warnings"] = report.warnings;
  py::list rows;
  for (const auto& r : report.rows) rows.append(row_dict(r));
  d["rows"] = rows;
  d["markdown"] = format_report(report, ReportFormat::Markdown);
  d["csv"] = format_report(report, ReportFormat::Csv);
  return d;
}

}  // namespace

PYBIND11_MODULE(_dcreact, m) {
  m.doc() = "Deferred-correction midpoint solver for 1D reaction-diffusion problems";

  py::register_exception<WindowError>(m, "WindowError", PyExc_IndexError);
  py::register_exception<AlignmentError>(m, "AlignmentError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DcRunError>(m, "DcRunError", PyExc_RuntimeError);
  py::register_exception<TrajectoryFormatError>(m, "TrajectoryFormatError", PyExc_ValueError);

  m.def("dc_coefficients", [](int p) { return as_pairs(derive_dc_coeffs(p)); }, py::arg("p"),
        "(numerator, denominator) strings of c_2 .. c_{2p+1}");
  m.def("interior_coefficients", [](int p) { return as_pairs(derive_interior_coeffs(p)); }, py::arg("p"));
  m.def("observed_order", &observed_order, py::arg("e1"), py::arg("e2"), py::arg("N1"), py::arg("N2"));
  m.def("stage_extension", &stage_extension, py::arg("p"), py::arg("j"));

  m.def(
      "problem_info",
      [](const std::string& name) {
        const ProblemSpec p = make_problem(name);
        py::dict d;
        d["name"] = p.name;
        d["J"] = p.J;
        d["bc"] = bc_name(p.bc);
        d["left"] = p.left;
        d["right"] = p.right;
        d["default_T"] = p.default_T;
        d["has_exact"] = p.exact.has_value();
        d["mu0"] = p.monotonicity.mu0;
        d["tau0"] = p.monotonicity.tau0;
        d["max_stable_step"] = p.max_stable_step();
        return d;
      },
      py::arg("name"));
  m.def(
      "validate_problem",
      [](const std::string& name, int samples, unsigned seed) {
        const ValidationReport r = validate_spec(make_problem(name), samples, seed);
        py::dict d;
        d["monotonicity_samples"] = r.monotonicity_samples;
        d["monotonicity_violations"] = r.monotonicity_violations;
        d["min_monotonicity_ratio"] = r.min_monotonicity_ratio;
        d["max_residual"] = r.max_residual;
        return d;
      },
      py::arg("name"), py::arg("samples") = 1000, py::arg("seed") = 7);

  py::class_<Run>(m, "Run")
      .def(py::init<const std::string&, int, int, int, std::optional<double>, double, int>(), py::arg("problem"),
           py::arg("order"), py::arg("N"), py::arg("n_cells"), py::arg("T") = py::none(),
           py::arg("abs_tol") = NewtonConfig{}.abs_tol, py::arg("max_iter") = NewtonConfig{}.max_iter)
      .def_property_readonly("order", [](const Run& r) { return r.result.order; })
      .def_property_readonly("N", [](const Run& r) { return r.result.N; })
      .def_property_readonly("k", [](const Run& r) { return r.result.k; })
      .def_property_readonly("T", [](const Run& r) { return r.final_time; })
      .def_property_readonly("nodes",
                             [](const Run& r) {
                               const Mesh1D& mesh = r.space.mesh();
                               return Eigen::VectorXd::LinSpaced(mesh.n_nodes(), mesh.left, mesh.right);
                             })
      .def_property_readonly("states",
                             [](const Run& r) {
                               const auto& s = r.result.final_stage().states();
                               return stack(std::span<const DofVector>(s.data(), static_cast<std::size_t>(r.result.N) + 1));
                             },
                             "Final-stage states at t_0 .. t_N, one row per time")
      .def("stage", [](const Run& r, int j) { return stack(r.result.stages.at(static_cast<std::size_t>(j)).states()); },
           py::arg("j"), "Every stored state of stage j, extension included")
      .def_property_readonly("solves",
                             [](const Run& r) {
                               py::dict d;
                               d["main_grid"] = r.result.solves.main_grid;
                               d["startup"] = r.result.solves.startup;
                               d["total"] = r.result.solves.total();
                               return d;
                             })
      .def("l2_norm", [](const Run& r, const DofVector& u) { return l2_norm(r.space, u); }, py::arg("u"))
      .def("error_vs_exact",
           [](const Run& r) {
             if (!r.problem.exact) throw std::invalid_argument("problem has no exact solution");
             return max_l2_error(r.space, r.result.final_stage(), r.problem.exact->value);
           })
      .def("error_vs", [](const Run& r, const Run& ref) {
        return max_l2_error(r.space, r.result.final_stage(), ref.result.final_stage());
      }, py::arg("reference"))
      .def("save", [](const Run& r, const std::filesystem::path& path) {
        TrajectoryHeader h;
        h.T = r.final_time;
        h.N = r.result.N;
        h.k = r.result.k;
        h.order = r.result.order;
        h.n_cells = r.space.mesh().n_cells;
        h.J = r.problem.J;
        h.bc = r.problem.bc;
        const auto& s = r.result.final_stage().states();
        write_trajectory(path, h, std::span<const DofVector>(s.data(), static_cast<std::size_t>(r.result.N) + 1));
      }, py::arg("path"));

  m.def(
      "read_trajectory",
      [](const std::filesystem::path& path) {
        const Trajectory t = read_trajectory(path);
        py::dict d;
        d["T"] = t.header.T;
        d["N"] = t.header.N;
        d["k"] = t.header.k;
        d["order"] = t.header.order;
        d["n_cells"] = t.header.n_cells;
        d["J"] = t.header.J;
        d["bc"] = bc_name(t.header.bc);
        d["states"] = stack(t.states);
        return d;
      },
      py::arg("path"));

  m.def(
      "run_study_toml",
      [](const std::string& text, const std::filesystem::path& base_dir) {
        const StudyConfig cfg = study_config_from_toml(text, base_dir);
        ConvergenceReport report;
        {
          py::gil_scoped_release release;
          report = run_study(cfg);
        }
        return report_dict(report);
      },
      py::arg("text"), py::arg("base_dir") = std::filesystem::path{});
}
