// dc-react: coefficient tables, single trajectories and convergence studies.

#include "dcreact/dc_time.hpp"
#include "dcreact/fd_ops.hpp"
#include "dcreact/harness.hpp"
#include "dcreact/study_config.hpp"
#include "dcreact/trajectory.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace dcreact;

namespace {

int cmd_coeffs(const std::string& table, int p) {
  std::vector<Rational> values;
  int first = 2;
  if (table == "dc") {
    values = derive_dc_coeffs(p);
  } else {
    values = derive_interior_coeffs(p);
  }
  std::cout << "index,numerator,denominator,float64\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", to_double(values[i]));
    std::cout << first + static_cast<int>(i) << ',' << numerator(values[i]) << ',' << denominator(values[i])
              << ',' << buf << '\n';
  }
  return 0;
}

struct RunArgs {
  std::string problem = "bistable";
  int order = 2;
  int steps = 40;
  int cells = 200;
  double T = 0.0;
  std::string out;
  bool verbose = false;
};

int cmd_run(const RunArgs& a) {
  const ProblemSpec problem = make_problem(a.problem);
  const double T = a.T > 0.0 ? a.T : problem.default_T;
  const FemSpace space(Mesh1D(problem.left, problem.right, a.cells), problem.J, problem.bc);
  DcIntegrator integrator(problem, space);
  if (a.verbose)
    integrator.set_log([](const StepLogEntry& e) {
      std::fprintf(stderr, "DC%d stage %d step %d k=%.3e newton %d residual %.2e\n", e.order, e.stage, e.step, e.k,
                   e.iterations, e.residual);
    });
  const DcRun run = integrator.run(a.order, T / a.steps, a.steps);
  const auto& states = run.final_stage().states();

  double max_abs = 0.0;
  for (int n = 0; n <= a.steps; ++n) max_abs = std::max(max_abs, states[n].cwiseAbs().maxCoeff());
  std::printf("problem %s order %d N %d cells %d T %g\n", problem.name.c_str(), a.order, a.steps, a.cells, T);
  std::printf("solves: main grid %ld, start-up %ld, total %ld\n", run.solves.main_grid_total(), run.solves.startup,
              run.solves.total());
  std::printf("max |u| over [0, T]: %.6g\n", max_abs);
  if (problem.exact)
    std::printf("max L2 error vs exact: %.6e\n", max_l2_error(space, run.final_stage(), problem.exact->value));

  if (!a.out.empty()) {
    TrajectoryHeader h;
    h.T = T;
    h.N = a.steps;
    h.k = T / a.steps;
    h.order = a.order;
    h.n_cells = a.cells;
    h.J = problem.J;
    h.bc = problem.bc;
    write_trajectory(a.out, h, std::span<const DofVector>(states.data(), static_cast<std::size_t>(a.steps) + 1));
    std::printf("wrote %s\n", a.out.c_str());
  }
  return 0;
}

int cmd_study(const std::string& config, int threads) {
  StudyConfig cfg = load_study_config(config);
  if (threads > 0) cfg.threads = threads;
  const ConvergenceReport report = run_study(cfg);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  write_report(report, ReportFormat::Markdown, std::cout);
  int failed = 0;
  for (const auto& r : report.rows) failed += r.failed ? 1 : 0;
  if (failed > 0) std::cerr << failed << " row(s) failed\n";
  return failed > 0 ? 2 : 0;
}

int cmd_validate(const std::string& name) {
  const ProblemSpec problem = make_problem(name);
  const ValidationReport r = validate_spec(problem);
  std::printf("problem %s: %d monotonicity samples, %d violations, min ratio %.6g (declared -mu0 = %.6g)\n",
              problem.name.c_str(), r.monotonicity_samples, r.monotonicity_violations, r.min_monotonicity_ratio,
              -problem.monotonicity.mu0);
  if (problem.exact) std::printf("max PDE residual of exact solution: %.3e\n", r.max_residual);
  return r.ok(1e-10) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deferred-correction midpoint solver for 1D reaction-diffusion problems"};
  app.require_subcommand(1);

  std::string table = "dc";
  int p = 5;
  auto* coeffs = app.add_subcommand("coeffs", "Print correction coefficients as exact rationals");
  coeffs->add_option("--table", table, "dc or interior")->check(CLI::IsMember({"dc", "interior"}));
  coeffs->add_option("--p", p, "Table size (c_2 .. c_{2p+1})")->check(CLI::Range(1, 12));

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Integrate one trajectory");
  run->add_option("--problem", run_args.problem, "bistable, heat, cubic or cubic:alpha=<value>");
  run->add_option("--order", run_args.order, "Even DC order")->check(CLI::Range(2, 24));
  run->add_option("--steps", run_args.steps, "Number of time steps N")->check(CLI::PositiveNumber);
  run->add_option("--cells", run_args.cells, "Number of mesh cells")->check(CLI::Range(2, 1 << 24));
  run->add_option("--T", run_args.T, "Final time (problem default when omitted)");
  run->add_option("--out", run_args.out, "Write the trajectory (binary) to this path");
  run->add_flag("-v,--verbose", run_args.verbose, "Log every nonlinear solve");

  std::string config;
  int threads = 0;
  auto* study = app.add_subcommand("study", "Run a convergence study from a TOML file");
  study->add_option("--config", config, "Study configuration")->required()->check(CLI::ExistingFile);
  study->add_option("--threads", threads, "Override the thread count")->check(CLI::NonNegativeNumber);

  std::string validate_name = "bistable";
  auto* validate = app.add_subcommand("validate", "Spot-check a registered problem");
  validate->add_option("--problem", validate_name, "Registry name");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*coeffs) return cmd_coeffs(table, p);
    if (*run) {
      if (run_args.order % 2 != 0) throw std::invalid_argument("--order must be even");
      return cmd_run(run_args);
    }
    if (*study) return cmd_study(config, threads);
    if (*validate) return cmd_validate(validate_name);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
