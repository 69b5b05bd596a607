#pragma once

// Newton iteration for the per-step nonlinear system
//
//   r(z) = shift * Mass z + K_M z + R(z) - rhs = 0
//
// where K_M couples the scalar stiffness with the diffusion matrix and R is
// the assembled reaction term. Dirichlet rows are replaced by z_b = 0.

#include "dcreact/banded.hpp"
#include "dcreact/fem1d.hpp"

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace dcreact {

enum class Damping { None, Halving };

struct NewtonConfig {
  double abs_tol = 1e-13;
  double rel_tol = 0.0;
  int max_iter = 25;
  Damping damping = Damping::Halving;
  int max_halvings = 8;
  /// Compares the Jacobian against a directional finite difference before
  /// each solve and throws if they disagree.
  bool verify_jacobian = false;

  void validate() const;
};

class NewtonError : public std::runtime_error {
 public:
  NewtonError(const std::string& what, double last_residual, int iterations)
      : std::runtime_error(what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

/// Operators shared by every step of a trajectory: system mass and the
/// M-coupled stiffness.
struct SystemOperators {
  SystemOperators(const FemSpace& space, const Eigen::MatrixXd& diffusion, int n_quad = 3);

  const FemSpace* space;
  Eigen::MatrixXd diffusion;
  BandedMatrix mass;
  BandedMatrix stiffness;
  int n_quad;
};

struct MidpointSystem {
  const SystemOperators* ops = nullptr;
  const Reaction* reaction = nullptr;
  double k = 0.0;
  double shift = 0.0;
  DofVector rhs;
  /// Factorization of shift * Mass + K_M (constrained rows replaced by the
  /// identity); defines the residual norm.
  std::shared_ptr<const BandedLU> norm_operator;

  /// Checks k > 0, shift > 0 and that the diffusion matrix is SPD.
  void validate() const;
};

MidpointSystem make_midpoint_system(const SystemOperators& ops, const Reaction& reaction, double k,
                                    DofVector rhs);

DofVector residual(const MidpointSystem& sys, const DofVector& z);
BandedMatrix jacobian(const MidpointSystem& sys, const DofVector& z);

/// Residual measured in units of the unknown: || (shift Mass + K_M)^{-1} r ||_L2.
/// This is the dual norm induced by the SPD linear part of the system, mapped
/// back through the mass inner product; its roundoff floor does not grow as
/// the mesh is refined.
double residual_norm(const MidpointSystem& sys, const DofVector& r);

/// Relative mismatch between J(z)·d and a central difference of r along d.
double jacobian_consistency(const MidpointSystem& sys, const DofVector& z, const DofVector& direction,
                            double step = 1e-6);

struct NewtonResult {
  DofVector z;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;  // residual norm before each iteration and at exit
};

/// Per-solve diagnostics sink: (iterations, final residual).
using NewtonLog = std::function<void(int iterations, double residual)>;

NewtonResult solve_stage(const MidpointSystem& sys, const DofVector& guess, const NewtonConfig& cfg,
                         const NewtonLog& log = {});

}  // namespace dcreact
