#pragma once

// P1 Lagrange finite elements on a uniform 1D mesh for J-component systems.

#include "dcreact/banded.hpp"
#include "dcreact/types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace dcreact {

struct Mesh1D {
  double left = 0.0;
  double right = 1.0;
  int n_cells = 2;

  Mesh1D() = default;
  Mesh1D(double left, double right, int n_cells);

  double h() const { return (right - left) / n_cells; }
  double node(int i) const { return left + i * h(); }
  int n_nodes() const { return n_cells + 1; }
};

enum class BoundaryCondition { HomogeneousDirichlet, HomogeneousNeumann };

/// Pointwise reaction term f: R^J -> R^J with its Jacobian (row-major J x J).
struct Reaction {
  using Map = std::function<void(std::span<const double> u, std::span<double> out)>;
  Map f;
  Map df;
};

/// Spatial function x -> R^J.
using SpatialField = std::function<void(double x, std::span<double> out)>;

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(int n_points);

class FemSpace {
 public:
  FemSpace(Mesh1D mesh, int n_components, BoundaryCondition bc);

  const Mesh1D& mesh() const { return mesh_; }
  int components() const { return J_; }
  BoundaryCondition bc() const { return bc_; }
  int n_nodes() const { return mesh_.n_nodes(); }
  int n_dofs() const { return J_ * mesh_.n_nodes(); }
  int dof(int node, int component) const { return node * J_ + component; }
  bool is_free_node(int node) const;
  const std::vector<int>& free_dofs() const { return free_dofs_; }

  /// Scalar (single-component) P1 matrices.
  const BandedMatrix& mass() const { return mass_; }
  const BandedMatrix& stiffness() const { return stiffness_; }

  /// mass ⊗ I_J in node-interleaved ordering.
  BandedMatrix system_mass() const;
  /// stiffness ⊗ M for a J x J diffusion matrix.
  BandedMatrix system_stiffness(const Eigen::MatrixXd& diffusion) const;

  /// Sets boundary dofs to zero under Dirichlet conditions; no-op for Neumann.
  void apply_bc(DofVector& u) const;

 private:
  Mesh1D mesh_;
  int J_;
  BoundaryCondition bc_;
  std::vector<int> free_dofs_;
  BandedMatrix mass_;
  BandedMatrix stiffness_;
};

FemSpace build_space(const Mesh1D& mesh, int n_components, BoundaryCondition bc);

/// Entries ∫ f(u_h) φ_i dx by per-cell Gauss quadrature.
DofVector assemble_reaction(const FemSpace& space, const Reaction& reaction, const DofVector& u,
                            int n_quad = 3);
/// Entries ∫ df(u_h) φ_j φ_i dx; same band as system_stiffness.
BandedMatrix assemble_reaction_jacobian(const FemSpace& space, const Reaction& reaction,
                                        const DofVector& u, int n_quad = 3);
/// Entries ∫ g(x) φ_i dx.
DofVector assemble_load(const FemSpace& space, const SpatialField& g, int n_quad = 3);

double l2_norm(const FemSpace& space, const DofVector& u);
double h1_seminorm(const FemSpace& space, const DofVector& u);
double lq_norm(const FemSpace& space, const DofVector& u, double q, int n_quad = 3);

/// Nodal interpolant of g (boundary dofs zeroed under Dirichlet).
DofVector interpolate(const FemSpace& space, const SpatialField& g);

enum class ProjectionMode { L2, Elliptic, Interpolate };

/// Elliptic for Dirichlet, L2 for Neumann (the Ritz projection is singular on
/// constants under pure Neumann conditions).
ProjectionMode default_projection(BoundaryCondition bc);

DofVector project_initial(const FemSpace& space, const SpatialField& u0, ProjectionMode mode);

}  // namespace dcreact
