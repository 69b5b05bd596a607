#include "dcreact/newton.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace dcreact {

void NewtonConfig::validate() const {
  if (!(abs_tol > 0.0) || rel_tol < 0.0) throw std::invalid_argument("Newton tolerances must be positive");
  if (max_iter < 1) throw std::invalid_argument("Newton max_iter must be >= 1");
  if (max_halvings < 0) throw std::invalid_argument("Newton max_halvings must be >= 0");
}

SystemOperators::SystemOperators(const FemSpace& space_, const Eigen::MatrixXd& diffusion_, int n_quad_)
    : space(&space_), diffusion(diffusion_), mass(space_.system_mass()),
      stiffness(space_.system_stiffness(diffusion_)), n_quad(n_quad_) {}

void MidpointSystem::validate() const {
  if (ops == nullptr || reaction == nullptr) throw std::invalid_argument("midpoint system is incomplete");
  if (!(k > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(shift > 0.0)) throw std::invalid_argument("mass shift must be positive");
  const Eigen::MatrixXd& m = ops->diffusion;
  if (!m.isApprox(m.transpose(), 1e-14))
    throw std::invalid_argument("diffusion matrix must be symmetric");
  if (Eigen::LLT<Eigen::MatrixXd>(m).info() != Eigen::Success)
    throw std::invalid_argument("diffusion matrix must be positive definite");
  if (rhs.size() != ops->space->n_dofs()) throw std::invalid_argument("rhs has the wrong size");
  if (!norm_operator) throw std::invalid_argument("midpoint system has no norm operator");
}

namespace {

template <class Fn>
void for_each_constrained_dof(const FemSpace& space, Fn fn) {
  for (int node = 0; node < space.n_nodes(); ++node) {
    if (space.is_free_node(node)) continue;
    for (int c = 0; c < space.components(); ++c) fn(space.dof(node, c));
  }
}

}  // namespace

MidpointSystem make_midpoint_system(const SystemOperators& ops, const Reaction& reaction, double k,
                                    DofVector rhs) {
  MidpointSystem sys;
  sys.ops = &ops;
  sys.reaction = &reaction;
  sys.k = k;
  sys.shift = 2.0 / k;
  sys.rhs = std::move(rhs);
  BandedMatrix linear = ops.stiffness;
  linear.add(ops.mass, sys.shift);
  for_each_constrained_dof(*ops.space, [&](int d) { linear.set_identity_row(d); });
  sys.norm_operator = std::make_shared<const BandedLU>(linear);
  sys.validate();
  return sys;
}

DofVector residual(const MidpointSystem& sys, const DofVector& z) {
  const FemSpace& space = *sys.ops->space;
  DofVector r = sys.shift * sys.ops->mass.multiply(z) + sys.ops->stiffness.multiply(z) +
                assemble_reaction(space, *sys.reaction, z, sys.ops->n_quad) - sys.rhs;
  for_each_constrained_dof(space, [&](int d) { r[d] = z[d]; });
  return r;
}

BandedMatrix jacobian(const MidpointSystem& sys, const DofVector& z) {
  const FemSpace& space = *sys.ops->space;
  BandedMatrix jac = assemble_reaction_jacobian(space, *sys.reaction, z, sys.ops->n_quad);
  jac.add(sys.ops->mass, sys.shift);
  jac.add(sys.ops->stiffness);
  for_each_constrained_dof(space, [&](int d) { jac.set_identity_row(d); });
  return jac;
}

double residual_norm(const MidpointSystem& sys, const DofVector& r) {
  const DofVector e = sys.norm_operator->solve(r);
  return std::sqrt(std::max(0.0, e.dot(sys.ops->mass.multiply(e))));
}

double jacobian_consistency(const MidpointSystem& sys, const DofVector& z, const DofVector& direction,
                            double step) {
  const DofVector jd = jacobian(sys, z).multiply(direction);
  const DofVector fd = (residual(sys, z + step * direction) - residual(sys, z - step * direction)) / (2.0 * step);
  const double scale = std::max(jd.norm(), std::numeric_limits<double>::min());
  return (jd - fd).norm() / scale;
}

NewtonResult solve_stage(const MidpointSystem& sys, const DofVector& guess, const NewtonConfig& cfg,
                         const NewtonLog& log) {
  cfg.validate();
  sys.validate();
  const FemSpace& space = *sys.ops->space;
  if (guess.size() != space.n_dofs()) throw std::invalid_argument("Newton guess has the wrong size");
  if (!guess.allFinite()) throw std::invalid_argument("Newton guess is not finite");

  NewtonResult out;
  out.z = guess;
  space.apply_bc(out.z);
  const double target = cfg.abs_tol + cfg.rel_tol * residual_norm(sys, sys.rhs);

  if (cfg.verify_jacobian) {
    DofVector dir = DofVector::LinSpaced(space.n_dofs(), 0.3, 1.1).array().sin().matrix();
    space.apply_bc(dir);
    const double mismatch = jacobian_consistency(sys, out.z, dir);
    if (mismatch > 1e-6)
      throw std::logic_error("Jacobian inconsistent with residual: relative mismatch " + std::to_string(mismatch));
  }

  DofVector r = residual(sys, out.z);
  double norm = residual_norm(sys, r);
  out.history.push_back(norm);
  int it = 0;
  while (norm > target) {
    if (it == cfg.max_iter)
      throw NewtonError("Newton did not converge in " + std::to_string(cfg.max_iter) +
                            " iterations (residual " + std::to_string(norm) + ")",
                        norm, it);
    const DofVector dz = BandedLU(jacobian(sys, out.z)).solve(-r);
    double lambda = 1.0;
    DofVector z_trial;
    DofVector r_trial;
    double norm_trial = std::numeric_limits<double>::infinity();
    for (int halving = 0;; ++halving) {
      z_trial = out.z + lambda * dz;
      space.apply_bc(z_trial);
      try {
        r_trial = residual(sys, z_trial);
        norm_trial = residual_norm(sys, r_trial);
      } catch (const EvaluationError&) {
        norm_trial = std::numeric_limits<double>::infinity();
      }
      const bool accept = std::isfinite(norm_trial) && (cfg.damping == Damping::None || norm_trial < norm);
      if (accept || cfg.damping == Damping::None || halving == cfg.max_halvings) break;
      lambda *= 0.5;
    }
    ++it;
    if (!std::isfinite(norm_trial))
      throw NewtonError("Newton iterate became non-finite", norm, it);
    out.z = std::move(z_trial);
    r = std::move(r_trial);
    norm = norm_trial;
    out.history.push_back(norm);
  }
  out.iterations = it;
  out.residual = norm;
  if (log) log(it, norm);
  return out;
}

}  // namespace dcreact
