#pragma once

// Deferred-correction time stepping on top of the implicit midpoint rule.
//
// Stage 0 is the midpoint rule (order 2). Stage j >= 1 re-solves the same
// midpoint system with finite-difference corrections built from stage j-1,
// raising the order to 2j+2. The corrector at step n reads stage j-1 on
// [n-j, n+1+j], so earlier stages are integrated past the final time; the
// first j values of stage j come from a start-up scheme that reads a stage
// j-1 solution on the refined step k/(2j+1).

#include "dcreact/fd_ops.hpp"
#include "dcreact/fem1d.hpp"
#include "dcreact/newton.hpp"
#include "dcreact/problems.hpp"

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace dcreact {

struct TimeGrid {
  double T = 0.0;
  int N = 1;
  int extension = 0;

  TimeGrid() = default;
  TimeGrid(double T, int N, int extension = 0);
  double k() const { return T / N; }
  double t(int n) const { return n * k(); }
};

/// Number of steps past N stored for stage j of a DC(2p+2) run:
/// p(p+1)/2 - j(j+1)/2. Stage j-1 must reach j indices further than stage j.
int stage_extension(int p, int j);

class StageSeries {
 public:
  StageSeries(int stage, double k, int N, int extension);

  int stage() const { return stage_; }
  int order() const { return 2 * stage_ + 2; }
  double k() const { return k_; }
  int N() const { return N_; }
  int extension() const { return extension_; }
  int last_index() const { return N_ + extension_; }
  std::size_t size() const { return states_.size(); }

  const DofVector& at(int n) const;
  DofVector& at(int n);
  /// Read-only view over every stored index.
  TimeSeriesView view() const;
  const std::vector<DofVector>& states() const { return states_; }

 private:
  int stage_;
  double k_;
  int N_;
  int extension_;
  std::vector<DofVector> states_;
};

struct SolveCounts {
  /// Nonlinear solves on the run's own grid, per stage (start-up included).
  std::vector<long> main_grid;
  /// Every solve performed inside refined start-up runs, recursively.
  long startup = 0;

  long main_grid_total() const;
  long total() const { return main_grid_total() + startup; }
};

struct DcRun {
  int order = 2;
  double k = 0.0;
  int N = 0;
  std::vector<StageSeries> stages;
  SolveCounts solves;

  const StageSeries& final_stage() const { return stages.back(); }
  /// Sum of stage extensions; main_grid_total() - total_extension() == (p+1) N.
  long total_extension() const;
};

struct StepLogEntry {
  int order;  // order of the run that performed the solve
  int stage;
  int step;   // n, for the solve producing index n+1
  double k;
  int iterations;
  double residual;
};
using StepLog = std::function<void(const StepLogEntry&)>;

class DcRunError : public std::runtime_error {
 public:
  DcRunError(const std::string& what, int stage, int step, std::shared_ptr<DcRun> partial)
      : std::runtime_error(what), stage_(stage), step_(step), partial_(std::move(partial)) {}
  int stage() const noexcept { return stage_; }
  int step() const noexcept { return step_; }
  /// Stages completed before the error.
  const DcRun* partial() const noexcept { return partial_.get(); }

 private:
  int stage_;
  int step_;
  std::shared_ptr<DcRun> partial_;
};

class DcIntegrator {
 public:
  DcIntegrator(const ProblemSpec& problem, const FemSpace& space, NewtonConfig newton = {});

  void set_projection(ProjectionMode mode) { projection_ = mode; }
  void set_log(StepLog log) { log_ = std::move(log); }
  const NewtonConfig& newton() const { return newton_; }

  DofVector initial_state() const;

  /// Implicit midpoint step u_n -> u_{n+1}. `u_prev` (optional) improves the
  /// Newton initial guess.
  DofVector step_dc2(double k, double t_n, const DofVector& u_n, const DofVector* u_prev = nullptr) const;

  /// Stage-j corrector producing u^{2j+2, n+1}. Reads `prev` only on
  /// [n-j, n+1+j]; throws WindowError when that window is not available.
  DofVector step_correction(int j, const TimeSeriesView& prev, double k, int n, const DofVector& u_n) const;

  /// Start-up values u^{2j+2, 1..j} from the stage j-1 solution on step
  /// k/(2j+1), which must cover fine indices 0..(2j+1)j.
  std::vector<DofVector> startup_values(int j, const TimeSeriesView& fine, double k, const DofVector& u0) const;

  /// Full DC(order) cascade with N steps of size k.
  DcRun run(int order, double k, int N) const;

 private:
  DofVector solve_midpoint(double k, double t_mid, const DofVector& u_n, const DofVector& g_lambda,
                           const DofVector& g_gamma, const DofVector& w_guess, int order, int stage,
                           int step) const;

  const ProblemSpec* problem_;
  const FemSpace* space_;
  NewtonConfig newton_;
  SystemOperators ops_;
  ProjectionMode projection_;
  StepLog log_;
};

/// Convenience wrapper: DC(order) on `grid` (grid.extension is ignored; the
/// required per-stage extensions are derived from the order).
DcRun run_dc(int order, const ProblemSpec& problem, const FemSpace& space, const TimeGrid& grid,
             const NewtonConfig& newton = {});

}  // namespace dcreact
