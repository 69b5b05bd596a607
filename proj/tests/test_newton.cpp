#include "dcreact/newton.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dcreact;

namespace {

Reaction scalar_reaction(std::function<double(double)> f, std::function<double(double)> df) {
  return {[f](std::span<const double> u, std::span<double> o) { o[0] = f(u[0]); },
          [df](std::span<const double> u, std::span<double> o) { o[0] = df(u[0]); }};
}

const Reaction kZero = scalar_reaction([](double) { return 0.0; }, [](double) { return 0.0; });
const Reaction kCube = scalar_reaction([](double v) { return v * v * v; }, [](double v) { return 3 * v * v; });
const Reaction kBistable = scalar_reaction([](double v) { return 1e4 * v * (v - 1.0) * (v - 0.25); },
                                           [](double v) { return 1e4 * (3 * v * v - 2.5 * v + 0.25); });

Eigen::MatrixXd one() { return Eigen::MatrixXd::Identity(1, 1); }

}  // namespace

TEST_CASE("config validation") {
  NewtonConfig c;
  CHECK_NOTHROW(c.validate());
  c.abs_tol = 0.0;
  CHECK_THROWS(c.validate());
  c = {};
  c.max_iter = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("diffusion must be symmetric positive definite") {
  const FemSpace s(Mesh1D(0, 1, 4), 2, BoundaryCondition::HomogeneousNeumann);
  Eigen::MatrixXd D(2, 2);
  D << 1.0, 2.0, 2.0, 1.0;  // indefinite
  const SystemOperators ops(s, D);
  const Reaction zero2{[](std::span<const double>, std::span<double> o) { o[0] = o[1] = 0.0; },
                       [](std::span<const double>, std::span<double> o) { std::fill(o.begin(), o.end(), 0.0); }};
  CHECK_THROWS_AS(make_midpoint_system(ops, zero2, 0.1, DofVector::Zero(s.n_dofs())), std::invalid_argument);
  D << 1.0, 0.3, 0.2, 1.0;  // not symmetric
  const SystemOperators ops2(s, D);
  CHECK_THROWS_AS(make_midpoint_system(ops2, zero2, 0.1, DofVector::Zero(s.n_dofs())), std::invalid_argument);
}

TEST_CASE("linear problem converges in one iteration to the direct solve") {
  const FemSpace s(Mesh1D(0, 1, 12), 1, BoundaryCondition::HomogeneousDirichlet);
  const SystemOperators ops(s, one());
  DofVector rhs = DofVector::LinSpaced(13, 0.0, 1.0).array().sin().matrix();
  const MidpointSystem sys = make_midpoint_system(ops, kZero, 0.05, rhs);
  const NewtonResult r = solve_stage(sys, DofVector::Zero(13), {});
  CHECK(r.iterations == 1);

  BandedMatrix a = ops.stiffness;
  a.add(ops.mass, 2.0 / 0.05);
  a.set_identity_row(0);
  a.set_identity_row(12);
  rhs[0] = rhs[12] = 0.0;
  const DofVector direct = BandedLU(a).solve(rhs);
  CHECK((r.z - direct).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("cubic reaction on a two-cell mesh matches a fixed-point oracle") {
  const FemSpace s(Mesh1D(0, 1, 2), 1, BoundaryCondition::HomogeneousNeumann);
  const SystemOperators ops(s, one());
  const double k = 0.1;
  const DofVector rhs = DofVector::Constant(3, 3.0);
  const MidpointSystem sys = make_midpoint_system(ops, kCube, k, rhs);
  const NewtonResult r = solve_stage(sys, DofVector::Zero(3), {});

  // Oracle: z = A^{-1}(rhs - R(z)) with R from a 5-point rule written out here.
  const double h = 0.5;
  const double gp[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                        0.2369268850561891};
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  for (int c = 0; c < 2; ++c) {
    A(c, c) += (2.0 / k) * h / 3 + 1.0 / h;
    A(c + 1, c + 1) += (2.0 / k) * h / 3 + 1.0 / h;
    A(c, c + 1) += (2.0 / k) * h / 6 - 1.0 / h;
    A(c + 1, c) += (2.0 / k) * h / 6 - 1.0 / h;
  }
  Eigen::Vector3d z = Eigen::Vector3d::Zero();
  for (int it = 0; it < 500; ++it) {
    Eigen::Vector3d R = Eigen::Vector3d::Zero();
    for (int c = 0; c < 2; ++c)
      for (int q = 0; q < 5; ++q) {
        const double sq = 0.5 * (gp[q] + 1.0);
        const double u = (1 - sq) * z[c] + sq * z[c + 1];
        R[c] += 0.5 * h * gw[q] * u * u * u * (1 - sq);
        R[c + 1] += 0.5 * h * gw[q] * u * u * u * sq;
      }
    z = A.ldlt().solve(Eigen::Vector3d(rhs) - R);
  }
  CHECK((r.z - DofVector(z)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("warm start at the solution needs at most one iteration") {
  const FemSpace s(Mesh1D(0, 1, 20), 1, BoundaryCondition::HomogeneousNeumann);
  const SystemOperators ops(s, one());
  const DofVector rhs = DofVector::LinSpaced(21, -1.0, 1.0) * 50.0;
  const MidpointSystem sys = make_midpoint_system(ops, kBistable, 1e-3, rhs);
  const NewtonResult first = solve_stage(sys, DofVector::Zero(21), {});
  const NewtonResult again = solve_stage(sys, first.z, {});
  CHECK(again.iterations <= 1);
  CHECK(again.residual <= NewtonConfig{}.abs_tol);
}

TEST_CASE("residual contract and quadratic convergence") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  const FemSpace s(Mesh1D(0, 1, 40), 1, BoundaryCondition::HomogeneousNeumann);
  const SystemOperators ops(s, one());
  for (int trial = 0; trial < 10; ++trial) {
    DofVector u_n(41);
    for (int i = 0; i < 41; ++i) u_n[i] = dist(rng);
    const double k = 7e-4;
    const DofVector rhs = ops.mass.multiply((2.0 / k) * u_n);
    const MidpointSystem sys = make_midpoint_system(ops, kBistable, k, rhs);
    const NewtonResult r = solve_stage(sys, u_n, {});
    CHECK(r.residual <= NewtonConfig{}.abs_tol);
    CHECK(residual_norm(sys, residual(sys, r.z)) == doctest::Approx(r.residual));
    for (std::size_t i = 0; i + 1 < r.history.size(); ++i)
      if (r.history[i] <= 1e-3 && r.history[i + 1] > 1e-14) CHECK(r.history[i + 1] <= 1e3 * r.history[i] * r.history[i]);
  }
}

TEST_CASE("Jacobian matches finite differences of the residual") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const FemSpace s(Mesh1D(0, 1, 30), 1, BoundaryCondition::HomogeneousDirichlet);
  const SystemOperators ops(s, one());
  const MidpointSystem sys = make_midpoint_system(ops, kBistable, 1e-3, DofVector::Zero(31));
  for (int trial = 0; trial < 20; ++trial) {
    DofVector z(31), d(31);
    for (int i = 0; i < 31; ++i) {
      z[i] = dist(rng);
      d[i] = dist(rng);
    }
    CHECK(jacobian_consistency(sys, z, d) < 1e-6);
  }
}

TEST_CASE("verify_jacobian runs the consistency check inside the solve") {
  const FemSpace s(Mesh1D(0, 1, 10), 1, BoundaryCondition::HomogeneousNeumann);
  const SystemOperators ops(s, one());
  NewtonConfig cfg;
  cfg.verify_jacobian = true;
  const MidpointSystem good = make_midpoint_system(ops, kCube, 0.1, DofVector::Ones(11));
  CHECK_NOTHROW(solve_stage(good, DofVector::Zero(11), cfg));
  const Reaction wrong = scalar_reaction([](double v) { return v * v * v; }, [](double v) { return v * v; });
  const MidpointSystem bad = make_midpoint_system(ops, wrong, 0.1, DofVector::Ones(11));
  CHECK_THROWS_AS(solve_stage(bad, DofVector::Ones(11), cfg), std::logic_error);
}

TEST_CASE("non-convergence is reported") {
  const FemSpace s(Mesh1D(0, 1, 10), 1, BoundaryCondition::HomogeneousNeumann);
  const SystemOperators ops(s, one());
  NewtonConfig cfg;
  cfg.max_iter = 1;
  const MidpointSystem sys = make_midpoint_system(ops, kBistable, 7e-4, DofVector::Constant(11, 1e4));
  try {
    solve_stage(sys, DofVector::Zero(11), cfg);
    FAIL("expected NewtonError");
  } catch (const NewtonError& e) {
    CHECK(e.iterations() == 1);
    CHECK(e.last_residual() > cfg.abs_tol);
  }
}

TEST_CASE("Dirichlet rows pin boundary values") {
  const FemSpace s(Mesh1D(0, 1, 8), 1, BoundaryCondition::HomogeneousDirichlet);
  const SystemOperators ops(s, one());
  const MidpointSystem sys = make_midpoint_system(ops, kCube, 0.1, DofVector::Ones(9));
  const NewtonResult r = solve_stage(sys, DofVector::Ones(9), {});
  CHECK(r.z[0] == 0.0);
  CHECK(r.z[8] == 0.0);
}
