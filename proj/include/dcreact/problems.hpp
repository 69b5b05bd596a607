#pragma once

#include "dcreact/fem1d.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dcreact {

/// Space-time function (x, t) -> R^J.
using SpaceTimeField = std::function<void(double x, double t, std::span<double> out)>;

/// Monotonicity data for
///   (f(x)-f(y))·(x-y) >= alpha |x-y|^q + tau(y) |x-y|^2   and   (df(x)y)·y >= -mu0 |y|^2.
struct Monotonicity {
  double alpha = 0.0;
  double q = 2.0;
  double tau0 = 0.0;
  double mu0 = 0.0;
};

/// Closed-form solution with the derivatives needed for residual sampling.
struct ExactSolution {
  SpaceTimeField value;
  SpaceTimeField time_derivative;
  SpaceTimeField laplacian;  // u_xx
};

struct ProblemSpec {
  std::string name;
  int J = 1;
  Eigen::MatrixXd diffusion;
  Reaction reaction;
  SpaceTimeField source;
  SpatialField u0;
  BoundaryCondition bc = BoundaryCondition::HomogeneousDirichlet;
  Monotonicity monotonicity;
  std::optional<ExactSolution> exact;
  double left = 0.0;
  double right = 1.0;
  double default_T = 0.1;

  /// Largest step with k * mu0 < 2; infinity when mu0 == 0.
  double max_stable_step() const;
};

ProblemSpec bistable();
ProblemSpec manufactured_linear_heat();
ProblemSpec manufactured_cubic(double alpha_stiff);

/// Registry lookup: "bistable", "heat", "cubic" or "cubic:alpha=<value>".
ProblemSpec make_problem(const std::string& name);

struct ValidationReport {
  int monotonicity_samples = 0;
  int monotonicity_violations = 0;
  /// Smallest observed (df(x)y)·y / |y|^2.
  double min_monotonicity_ratio = 0.0;
  /// |u_t - M u_xx + f(u) - S| at each sampled point (empty without exact).
  std::vector<double> residuals;
  double max_residual = 0.0;

  bool ok(double residual_tol) const {
    return monotonicity_violations == 0 && max_residual <= residual_tol;
  }
};

/// Spot-checks the declared mu0 on random (x, y) drawn from [-sample_range,
/// sample_range]^J and samples the PDE residual of the exact solution on
/// [left, right] x [0, default_T]. Deterministic for a fixed seed.
ValidationReport validate_spec(const ProblemSpec& spec, int samples = 1000, unsigned seed = 7,
                               double sample_range = 2.0);

}  // namespace dcreact
