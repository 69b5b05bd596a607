#include "dcreact/fem1d.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace dcreact {

Mesh1D::Mesh1D(double left_, double right_, int n_cells_) : left(left_), right(right_), n_cells(n_cells_) {
  if (!(left < right)) throw std::invalid_argument("mesh requires left < right");
  if (n_cells < 2) throw std::invalid_argument("mesh requires at least 2 cells");
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one point");
  QuadratureRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.points[n - 1 - i] = x;
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

FemSpace::FemSpace(Mesh1D mesh, int n_components, BoundaryCondition bc)
    : mesh_(mesh), J_(n_components), bc_(bc),
      mass_(mesh.n_nodes(), 1, 1), stiffness_(mesh.n_nodes(), 1, 1) {
  if (J_ < 1) throw std::invalid_argument("FemSpace needs at least one component");
  if (!(mesh.left < mesh.right) || mesh.n_cells < 2) throw std::invalid_argument("invalid mesh");
  const double h = mesh_.h();
  for (int e = 0; e < mesh_.n_cells; ++e) {
    const int a = e;
    const int b = e + 1;
    mass_.at(a, a) += h / 3.0;
    mass_.at(b, b) += h / 3.0;
    mass_.at(a, b) += h / 6.0;
    mass_.at(b, a) += h / 6.0;
    stiffness_.at(a, a) += 1.0 / h;
    stiffness_.at(b, b) += 1.0 / h;
    stiffness_.at(a, b) -= 1.0 / h;
    stiffness_.at(b, a) -= 1.0 / h;
  }
  for (int node = 0; node < n_nodes(); ++node)
    if (is_free_node(node))
      for (int c = 0; c < J_; ++c) free_dofs_.push_back(dof(node, c));
}

bool FemSpace::is_free_node(int node) const {
  if (bc_ == BoundaryCondition::HomogeneousNeumann) return true;
  return node != 0 && node != n_nodes() - 1;
}

BandedMatrix FemSpace::system_mass() const {
  BandedMatrix out(n_dofs(), 2 * J_ - 1, 2 * J_ - 1);
  for (int a = 0; a < n_nodes(); ++a)
    for (int b = std::max(0, a - 1); b <= std::min(n_nodes() - 1, a + 1); ++b)
      for (int c = 0; c < J_; ++c) out.at(dof(a, c), dof(b, c)) = mass_(a, b);
  return out;
}

BandedMatrix FemSpace::system_stiffness(const Eigen::MatrixXd& diffusion) const {
  if (diffusion.rows() != J_ || diffusion.cols() != J_)
    throw std::invalid_argument("diffusion matrix must be J x J");
  BandedMatrix out(n_dofs(), 2 * J_ - 1, 2 * J_ - 1);
  for (int a = 0; a < n_nodes(); ++a)
    for (int b = std::max(0, a - 1); b <= std::min(n_nodes() - 1, a + 1); ++b)
      for (int c = 0; c < J_; ++c)
        for (int d = 0; d < J_; ++d) out.at(dof(a, c), dof(b, d)) = stiffness_(a, b) * diffusion(c, d);
  return out;
}

void FemSpace::apply_bc(DofVector& u) const {
  if (bc_ != BoundaryCondition::HomogeneousDirichlet) return;
  for (int c = 0; c < J_; ++c) {
    u[dof(0, c)] = 0.0;
    u[dof(n_nodes() - 1, c)] = 0.0;
  }
}

FemSpace build_space(const Mesh1D& mesh, int n_components, BoundaryCondition bc) {
  return FemSpace(mesh, n_components, bc);
}

namespace {

void check_size(const FemSpace& space, const DofVector& u) {
  if (u.size() != space.n_dofs())
    throw std::invalid_argument("DOF vector has " + std::to_string(u.size()) + " entries, expected " +
                                std::to_string(space.n_dofs()));
}

void require_finite(std::span<const double> v, const char* what, int cell) {
  for (double x : v)
    if (!std::isfinite(x)) throw EvaluationError(std::string(what) + " returned a non-finite value", cell);
}

}  // namespace

DofVector assemble_reaction(const FemSpace& space, const Reaction& reaction, const DofVector& u, int n_quad) {
  check_size(space, u);
  const int J = space.components();
  const double h = space.mesh().h();
  const QuadratureRule rule = gauss_legendre(n_quad);
  DofVector out = DofVector::Zero(space.n_dofs());
  std::vector<double> uq(J), fq(J);
  for (int e = 0; e < space.mesh().n_cells; ++e) {
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double phi0 = 0.5 * (1.0 - rule.points[q]);
      const double phi1 = 0.5 * (1.0 + rule.points[q]);
      for (int c = 0; c < J; ++c) uq[c] = phi0 * u[space.dof(e, c)] + phi1 * u[space.dof(e + 1, c)];
      reaction.f(uq, fq);
      require_finite(fq, "reaction term", e);
      const double w = rule.weights[q] * 0.5 * h;
      for (int c = 0; c < J; ++c) {
        out[space.dof(e, c)] += w * fq[c] * phi0;
        out[space.dof(e + 1, c)] += w * fq[c] * phi1;
      }
    }
  }
  return out;
}

BandedMatrix assemble_reaction_jacobian(const FemSpace& space, const Reaction& reaction, const DofVector& u,
                                        int n_quad) {
  check_size(space, u);
  const int J = space.components();
  const double h = space.mesh().h();
  const QuadratureRule rule = gauss_legendre(n_quad);
  BandedMatrix out(space.n_dofs(), 2 * J - 1, 2 * J - 1);
  std::vector<double> uq(J), dfq(J * J);
  for (int e = 0; e < space.mesh().n_cells; ++e) {
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double phi[2] = {0.5 * (1.0 - rule.points[q]), 0.5 * (1.0 + rule.points[q])};
      for (int c = 0; c < J; ++c) uq[c] = phi[0] * u[space.dof(e, c)] + phi[1] * u[space.dof(e + 1, c)];
      reaction.df(uq, dfq);
      require_finite(dfq, "reaction Jacobian", e);
      const double w = rule.weights[q] * 0.5 * h;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < J; ++c)
            for (int d = 0; d < J; ++d)
              out.at(space.dof(e + a, c), space.dof(e + b, d)) += w * dfq[c * J + d] * phi[a] * phi[b];
    }
  }
  return out;
}

DofVector assemble_load(const FemSpace& space, const SpatialField& g, int n_quad) {
  const int J = space.components();
  const double h = space.mesh().h();
  const QuadratureRule rule = gauss_legendre(n_quad);
  DofVector out = DofVector::Zero(space.n_dofs());
  std::vector<double> gq(J);
  for (int e = 0; e < space.mesh().n_cells; ++e) {
    const double x0 = space.mesh().node(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double phi0 = 0.5 * (1.0 - rule.points[q]);
      const double phi1 = 0.5 * (1.0 + rule.points[q]);
      g(x0 + phi1 * h, gq);
      require_finite(gq, "load function", e);
      const double w = rule.weights[q] * 0.5 * h;
      for (int c = 0; c < J; ++c) {
        out[space.dof(e, c)] += w * gq[c] * phi0;
        out[space.dof(e + 1, c)] += w * gq[c] * phi1;
      }
    }
  }
  return out;
}

double l2_norm(const FemSpace& space, const DofVector& u) {
  check_size(space, u);
  return std::sqrt(std::max(0.0, u.dot(space.system_mass().multiply(u))));
}

double h1_seminorm(const FemSpace& space, const DofVector& u) {
  check_size(space, u);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(space.components(), space.components());
  return std::sqrt(std::max(0.0, u.dot(space.system_stiffness(identity).multiply(u))));
}

double lq_norm(const FemSpace& space, const DofVector& u, double q, int n_quad) {
  check_size(space, u);
  if (q < 1.0) throw std::invalid_argument("lq_norm requires q >= 1");
  const int J = space.components();
  const double h = space.mesh().h();
  const QuadratureRule rule = gauss_legendre(n_quad);
  double acc = 0.0;
  for (int e = 0; e < space.mesh().n_cells; ++e) {
    for (std::size_t iq = 0; iq < rule.points.size(); ++iq) {
      const double phi0 = 0.5 * (1.0 - rule.points[iq]);
      const double phi1 = 0.5 * (1.0 + rule.points[iq]);
      double sq = 0.0;
      for (int c = 0; c < J; ++c) {
        const double v = phi0 * u[space.dof(e, c)] + phi1 * u[space.dof(e + 1, c)];
        sq += v * v;
      }
      acc += rule.weights[iq] * 0.5 * h * std::pow(std::sqrt(sq), q);
    }
  }
  return std::pow(acc, 1.0 / q);
}

DofVector interpolate(const FemSpace& space, const SpatialField& g) {
  const int J = space.components();
  DofVector out(space.n_dofs());
  std::vector<double> gx(J);
  for (int node = 0; node < space.n_nodes(); ++node) {
    g(space.mesh().node(node), gx);
    for (int c = 0; c < J; ++c) out[space.dof(node, c)] = gx[c];
  }
  space.apply_bc(out);
  return out;
}

ProjectionMode default_projection(BoundaryCondition bc) {
  return bc == BoundaryCondition::HomogeneousDirichlet ? ProjectionMode::Elliptic : ProjectionMode::L2;
}

namespace {

// Solves A c = b on free dofs with constrained dofs pinned to zero.
DofVector solve_on_free_dofs(const FemSpace& space, BandedMatrix a, DofVector b) {
  for (int node = 0; node < space.n_nodes(); ++node) {
    if (space.is_free_node(node)) continue;
    for (int c = 0; c < space.components(); ++c) {
      a.set_identity_row(space.dof(node, c));
      b[space.dof(node, c)] = 0.0;
    }
  }
  DofVector out = BandedLU(a).solve(b);
  space.apply_bc(out);
  return out;
}

}  // namespace

DofVector project_initial(const FemSpace& space, const SpatialField& u0, ProjectionMode mode) {
  switch (mode) {
    case ProjectionMode::Interpolate:
      return interpolate(space, u0);
    case ProjectionMode::L2:
      return solve_on_free_dofs(space, space.system_mass(), assemble_load(space, u0, 5));
    case ProjectionMode::Elliptic: {
      if (space.bc() != BoundaryCondition::HomogeneousDirichlet)
        throw std::invalid_argument("elliptic projection is unsupported under Neumann conditions");
      // For P1 in 1D, (u0', φ_i') only involves nodal values of u0, so the
      // stiffness load is exactly K times the raw nodal samples.
      const int J = space.components();
      DofVector samples(space.n_dofs());
      std::vector<double> gx(J);
      for (int node = 0; node < space.n_nodes(); ++node) {
        u0(space.mesh().node(node), gx);
        for (int c = 0; c < J; ++c) samples[space.dof(node, c)] = gx[c];
      }
      const BandedMatrix k = space.system_stiffness(Eigen::MatrixXd::Identity(J, J));
      return solve_on_free_dofs(space, k, k.multiply(samples));
    }
  }
  throw std::invalid_argument("unknown projection mode");
}

}  // namespace dcreact
