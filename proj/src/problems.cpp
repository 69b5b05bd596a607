#include "dcreact/problems.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dcreact {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd scalar_diffusion(double d) { return Eigen::MatrixXd::Constant(1, 1, d); }

}  // namespace

double ProblemSpec::max_stable_step() const {
  if (monotonicity.mu0 <= 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 / monotonicity.mu0;
}

ProblemSpec bistable() {
  ProblemSpec p;
  p.name = "bistable";
  p.J = 1;
  p.diffusion = scalar_diffusion(1.0);
  p.reaction.f = [](std::span<const double> u, std::span<double> out) {
    out[0] = 1e4 * u[0] * (u[0] - 1.0) * (u[0] - 0.25);
  };
  p.reaction.df = [](std::span<const double> u, std::span<double> out) {
    out[0] = 1e4 * (3.0 * u[0] * u[0] - 2.5 * u[0] + 0.25);
  };
  p.source = [](double, double, std::span<double> out) { out[0] = 0.0; };
  p.u0 = [](double x, std::span<double> out) { out[0] = std::exp(-100.0 * x * x); };
  p.bc = BoundaryCondition::HomogeneousNeumann;
  p.monotonicity = {0.0, 2.0, -1500.0, 8125.0 / 3.0};
  p.default_T = 0.0295;
  return p;
}

ProblemSpec manufactured_linear_heat() {
  ProblemSpec p;
  p.name = "heat";
  p.J = 1;
  p.diffusion = scalar_diffusion(1.0);
  p.reaction.f = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
  p.reaction.df = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
  p.source = [](double, double, std::span<double> out) { out[0] = 0.0; };
  p.u0 = [](double x, std::span<double> out) { out[0] = std::sin(kPi * x); };
  p.bc = BoundaryCondition::HomogeneousDirichlet;
  p.monotonicity = {0.0, 2.0, 0.0, 0.0};
  p.exact = ExactSolution{
      [](double x, double t, std::span<double> out) { out[0] = std::exp(-kPi * kPi * t) * std::sin(kPi * x); },
      [](double x, double t, std::span<double> out) {
        out[0] = -kPi * kPi * std::exp(-kPi * kPi * t) * std::sin(kPi * x);
      },
      [](double x, double t, std::span<double> out) {
        out[0] = -kPi * kPi * std::exp(-kPi * kPi * t) * std::sin(kPi * x);
      },
  };
  p.default_T = 0.1;
  return p;
}

ProblemSpec manufactured_cubic(double alpha_stiff) {
  if (!(alpha_stiff > 0.0)) throw std::invalid_argument("cubic problem requires alpha_stiff > 0");
  ProblemSpec p;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", alpha_stiff);
  p.name = std::string("cubic:alpha=") + buf;
  p.J = 1;
  p.diffusion = scalar_diffusion(1.0);
  p.reaction.f = [alpha_stiff](std::span<const double> u, std::span<double> out) {
    out[0] = alpha_stiff * u[0] * u[0] * u[0];
  };
  p.reaction.df = [alpha_stiff](std::span<const double> u, std::span<double> out) {
    out[0] = 3.0 * alpha_stiff * u[0] * u[0];
  };
  // S = u_t - u_xx + f(u) for u = e^{-t} sin(pi x)
  p.source = [alpha_stiff](double x, double t, std::span<double> out) {
    const double s = std::sin(kPi * x);
    out[0] = (kPi * kPi - 1.0) * std::exp(-t) * s + alpha_stiff * std::exp(-3.0 * t) * s * s * s;
  };
  p.u0 = [](double x, std::span<double> out) { out[0] = std::sin(kPi * x); };
  p.bc = BoundaryCondition::HomogeneousDirichlet;
  // (x^3 - y^3)(x - y) >= (x - y)^4 / 4
  p.monotonicity = {alpha_stiff / 4.0, 4.0, 0.0, 0.0};
  p.exact = ExactSolution{
      [](double x, double t, std::span<double> out) { out[0] = std::exp(-t) * std::sin(kPi * x); },
      [](double x, double t, std::span<double> out) { out[0] = -std::exp(-t) * std::sin(kPi * x); },
      [](double x, double t, std::span<double> out) { out[0] = -kPi * kPi * std::exp(-t) * std::sin(kPi * x); },
  };
  p.default_T = 0.1;
  return p;
}

ProblemSpec make_problem(const std::string& name) {
  if (name == "bistable") return bistable();
  if (name == "heat") return manufactured_linear_heat();
  if (name == "cubic") return manufactured_cubic(10.0);
  const std::string prefix = "cubic:alpha=";
  if (name.rfind(prefix, 0) == 0) {
    std::size_t used = 0;
    const std::string value = name.substr(prefix.size());
    double alpha = 0.0;
    try {
      alpha = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw std::invalid_argument("bad cubic parameter in '" + name + "'");
    return manufactured_cubic(alpha);
  }
  throw std::invalid_argument("unknown problem '" + name + "'");
}

ValidationReport validate_spec(const ProblemSpec& spec, int samples, unsigned seed, double sample_range) {
  ValidationReport report;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-sample_range, sample_range);
  const int J = spec.J;
  std::vector<double> x(J), y(J), df(J * J);
  report.min_monotonicity_ratio = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    double yy = 0.0;
    for (int c = 0; c < J; ++c) {
      x[c] = coord(rng);
      y[c] = coord(rng);
      yy += y[c] * y[c];
    }
    if (yy == 0.0) continue;
    spec.reaction.df(x, df);
    double quad = 0.0;
    for (int r = 0; r < J; ++r)
      for (int c = 0; c < J; ++c) quad += df[r * J + c] * y[c] * y[r];
    ++report.monotonicity_samples;
    const double ratio = quad / yy;
    report.min_monotonicity_ratio = std::min(report.min_monotonicity_ratio, ratio);
    if (ratio < -spec.monotonicity.mu0 * (1.0 + 1e-12) - 1e-12) ++report.monotonicity_violations;
  }

  if (spec.exact) {
    std::uniform_real_distribution<double> xs(spec.left, spec.right);
    std::uniform_real_distribution<double> ts(0.0, spec.default_T);
    std::vector<double> u(J), ut(J), uxx(J), f(J), src(J);
    for (int s = 0; s < samples; ++s) {
      const double xp = xs(rng);
      const double tp = ts(rng);
      spec.exact->value(xp, tp, u);
      spec.exact->time_derivative(xp, tp, ut);
      spec.exact->laplacian(xp, tp, uxx);
      spec.reaction.f(u, f);
      spec.source(xp, tp, src);
      double worst = 0.0;
      for (int c = 0; c < J; ++c) {
        double diff = 0.0;
        for (int d = 0; d < J; ++d) diff += spec.diffusion(c, d) * uxx[d];
        worst = std::max(worst, std::abs(ut[c] - diff + f[c] - src[c]));
      }
      report.residuals.push_back(worst);
      report.max_residual = std::max(report.max_residual, worst);
    }
  }
  return report;
}

}  // namespace dcreact
