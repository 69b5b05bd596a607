#include "dcreact/dc_time.hpp"

#include <numeric>
#include <string>

namespace dcreact {

TimeGrid::TimeGrid(double T_, int N_, int extension_) : T(T_), N(N_), extension(extension_) {
  if (!(T > 0.0)) throw std::invalid_argument("final time must be positive");
  if (N < 1) throw std::invalid_argument("time grid needs N >= 1");
  if (extension < 0) throw std::invalid_argument("time grid extension must be >= 0");
}

int stage_extension(int p, int j) {
  if (p < 0 || j < 0 || j > p) throw std::invalid_argument("stage index outside [0, p]");
  return p * (p + 1) / 2 - j * (j + 1) / 2;
}

StageSeries::StageSeries(int stage, double k, int N, int extension)
    : stage_(stage), k_(k), N_(N), extension_(extension) {
  if (N < 1 || extension < 0 || !(k > 0.0)) throw std::invalid_argument("invalid stage series shape");
  states_.resize(static_cast<std::size_t>(N + extension + 1));
}

const DofVector& StageSeries::at(int n) const {
  if (n < 0 || n > last_index())
    throw WindowError("stage " + std::to_string(stage_) + " index " + std::to_string(n) + " outside [0, " +
                      std::to_string(last_index()) + "]");
  return states_[static_cast<std::size_t>(n)];
}

DofVector& StageSeries::at(int n) {
  return const_cast<DofVector&>(static_cast<const StageSeries&>(*this).at(n));
}

TimeSeriesView StageSeries::view() const { return TimeSeriesView(states_, 0); }

long SolveCounts::main_grid_total() const { return std::accumulate(main_grid.begin(), main_grid.end(), 0L); }

long DcRun::total_extension() const {
  long acc = 0;
  for (const auto& s : stages) acc += s.extension();
  return acc;
}

DcIntegrator::DcIntegrator(const ProblemSpec& problem, const FemSpace& space, NewtonConfig newton)
    : problem_(&problem), space_(&space), newton_(newton), ops_(space, problem.diffusion),
      projection_(default_projection(space.bc())) {
  if (problem.J != space.components()) throw std::invalid_argument("problem and space disagree on J");
  if (problem.bc != space.bc()) throw std::invalid_argument("problem and space disagree on the boundary condition");
  newton_.validate();
}

DofVector DcIntegrator::initial_state() const { return project_initial(*space_, problem_->u0, projection_); }

DofVector DcIntegrator::solve_midpoint(double k, double t_mid, const DofVector& u_n, const DofVector& g_lambda,
                                       const DofVector& g_gamma, const DofVector& w_guess, int order, int stage,
                                       int step) const {
  // (2/k) Mass (w - (u_n - gΓ)) - Mass gΛ + K_M w + R(w) = (s(t_{n+1/2}), φ)
  const ProblemSpec& problem = *problem_;
  const DofVector load = assemble_load(
      *space_, [&](double x, std::span<double> out) { problem.source(x, t_mid, out); }, ops_.n_quad);
  DofVector rhs = ops_.mass.multiply((2.0 / k) * (u_n - g_gamma) + g_lambda) + load;
  const MidpointSystem sys = make_midpoint_system(ops_, problem.reaction, k, std::move(rhs));
  NewtonResult result = solve_stage(sys, w_guess, newton_);
  if (log_) log_({order, stage, step, k, result.iterations, result.residual});
  DofVector u_next = 2.0 * (result.z + g_gamma) - u_n;
  space_->apply_bc(u_next);
  if (!u_next.allFinite()) throw NewtonError("non-finite state after midpoint solve", result.residual, result.iterations);
  return u_next;
}

DofVector DcIntegrator::step_dc2(double k, double t_n, const DofVector& u_n, const DofVector* u_prev) const {
  const DofVector zero = DofVector::Zero(u_n.size());
  DofVector guess = u_n;
  if (u_prev != nullptr) guess += 0.5 * (u_n - *u_prev);
  return solve_midpoint(k, t_n + 0.5 * k, u_n, zero, zero, guess, 2, 0, static_cast<int>(t_n / k + 0.5));
}

DofVector DcIntegrator::step_correction(int j, const TimeSeriesView& prev, double k, int n,
                                        const DofVector& u_n) const {
  if (j < 1) throw std::invalid_argument("correction stage must be >= 1");
  if (n < j) throw std::invalid_argument("corrector used before its start-up range (n < j)");
  const TimeSeriesView window = prev.restricted(n - j, n + 1 + j);
  const DofVector g_lambda = apply(d_lambda_stencil(j), window, n, k);
  const DofVector g_gamma = apply(e_gamma_stencil(j), window, n, k);
  const DofVector guess = 0.5 * (window.at(n) + window.at(n + 1)) - g_gamma;
  return solve_midpoint(k, (n + 0.5) * k, u_n, g_lambda, g_gamma, guess, 2 * j + 2, j, n);
}

std::vector<DofVector> DcIntegrator::startup_values(int j, const TimeSeriesView& fine, double k,
                                                    const DofVector& u0) const {
  if (j < 1) throw std::invalid_argument("start-up stage must be >= 1");
  std::vector<DofVector> out;
  out.reserve(j);
  DofVector u_n = u0;
  for (int n = 0; n < j; ++n) {
    const int center = (2 * j + 1) * n + j;
    // Each coarse interval only reads fine indices inside [(2j+1)n, (2j+1)(n+1)].
    const TimeSeriesView window = fine.restricted((2 * j + 1) * n, (2 * j + 1) * (n + 1));
    const DofVector g_lambda = bar_lambda_apply(j, window, center, k);
    const DofVector g_gamma = 0.5 * (bar_gamma_apply(j, window, center) + bar_gamma_apply(j, window, center + 1));
    const DofVector guess = 0.5 * (window.at(center) + window.at(center + 1)) - g_gamma;
    u_n = solve_midpoint(k, (n + 0.5) * k, u_n, g_lambda, g_gamma, guess, 2 * j + 2, j, n);
    out.push_back(u_n);
  }
  return out;
}

DcRun DcIntegrator::run(int order, double k, int N) const {
  if (order < 2 || order % 2 != 0) throw std::invalid_argument("DC order must be even and >= 2");
  if (N < 1 || !(k > 0.0)) throw std::invalid_argument("DC run needs N >= 1 and k > 0");
  const int p = order / 2 - 1;

  auto run_state = std::make_shared<DcRun>();
  DcRun& result = *run_state;
  result.order = order;
  result.k = k;
  result.N = N;
  result.solves.main_grid.assign(p + 1, 0);

  const DofVector u0 = initial_state();
  int stage = 0;
  int step = 0;
  try {
    {
      StageSeries base(0, k, N, stage_extension(p, 0));
      base.at(0) = u0;
      for (step = 0; step < base.last_index(); ++step) {
        base.at(step + 1) = step_dc2(k, step * k, base.at(step), step > 0 ? &base.at(step - 1) : nullptr);
        ++result.solves.main_grid[0];
      }
      result.stages.push_back(std::move(base));
    }
    for (stage = 1; stage <= p; ++stage) {
      const int j = stage;
      step = 0;
      const DcRun fine = run(2 * j, k / (2 * j + 1), (2 * j + 1) * j);
      result.solves.startup += fine.solves.total();

      StageSeries series(j, k, N, stage_extension(p, j));
      series.at(0) = u0;
      const std::vector<DofVector> start = startup_values(j, fine.final_stage().view(), k, u0);
      for (int n = 0; n < j; ++n) series.at(n + 1) = start[n];
      result.solves.main_grid[j] += j;

      const TimeSeriesView prev = result.stages[j - 1].view();
      for (step = j; step < series.last_index(); ++step) {
        series.at(step + 1) = step_correction(j, prev, k, step, series.at(step));
        ++result.solves.main_grid[j];
      }
      result.stages.push_back(std::move(series));
    }
  } catch (const DcRunError& e) {
    throw DcRunError(std::string("start-up run failed: ") + e.what(), stage, step, run_state);
  } catch (const std::runtime_error& e) {
    throw DcRunError("DC" + std::to_string(order) + " failed at stage " + std::to_string(stage) + ", step " +
                         std::to_string(step) + ": " + e.what(),
                     stage, step, run_state);
  }
  return std::move(*run_state);
}

DcRun run_dc(int order, const ProblemSpec& problem, const FemSpace& space, const TimeGrid& grid,
             const NewtonConfig& newton) {
  return DcIntegrator(problem, space, newton).run(order, grid.k(), grid.N);
}

}  // namespace dcreact
