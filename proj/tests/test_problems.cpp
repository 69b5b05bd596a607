#include "dcreact/problems.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace dcreact;

namespace {

double f1(const ProblemSpec& p, double u) {
  double out = 0.0;
  p.reaction.f(std::span<const double>(&u, 1), std::span<double>(&out, 1));
  return out;
}

double df1(const ProblemSpec& p, double u) {
  double out = 0.0;
  p.reaction.df(std::span<const double>(&u, 1), std::span<double>(&out, 1));
  return out;
}

double at(const SpaceTimeField& g, double x, double t) {
  double out = 0.0;
  g(x, t, std::span<double>(&out, 1));
  return out;
}

}  // namespace

TEST_CASE("bistable problem data") {
  const ProblemSpec p = bistable();
  CHECK(p.J == 1);
  CHECK(p.bc == BoundaryCondition::HomogeneousNeumann);
  CHECK(f1(p, 0.0) == 0.0);
  CHECK(f1(p, 1.0) == 0.0);
  CHECK(f1(p, 0.25) == 0.0);
  CHECK(p.monotonicity.tau0 == -1500.0);
  CHECK(p.monotonicity.mu0 == doctest::Approx(8125.0 / 3.0).epsilon(1e-15));
  CHECK(p.max_stable_step() == doctest::Approx(6.0 / 8125.0).epsilon(1e-15));
  CHECK(p.max_stable_step() * p.monotonicity.mu0 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(p.default_T == 0.0295);
  CHECK(std::lround(p.default_T / p.max_stable_step()) == 40);
  double u0 = 0.0;
  p.u0(0.0, std::span<double>(&u0, 1));
  CHECK(u0 == 1.0);
  CHECK(at(p.source, 0.3, 0.01) == 0.0);
}

TEST_CASE("bistable Jacobian minimum equals -mu0") {
  const ProblemSpec p = bistable();
  CHECK(df1(p, 5.0 / 12.0) == doctest::Approx(-8125.0 / 3.0).epsilon(1e-14));
  for (double u = -1.0; u <= 2.0; u += 1e-3) CHECK(df1(p, u) >= -8125.0 / 3.0 - 1e-9);
}

TEST_CASE("linear heat problem") {
  const ProblemSpec p = manufactured_linear_heat();
  REQUIRE(p.exact);
  CHECK(p.bc == BoundaryCondition::HomogeneousDirichlet);
  double u0 = 0.0;
  p.u0(0.3, std::span<double>(&u0, 1));
  CHECK(u0 == doctest::Approx(at(p.exact->value, 0.3, 0.0)));
  // ||u(., 0.1)||_L2 = e^{-pi^2 / 10} / sqrt(2) by a fine midpoint sum.
  const int n = 20000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += std::pow(at(p.exact->value, (i + 0.5) / n, 0.1), 2) / n;
  CHECK(std::sqrt(acc) == doctest::Approx(std::exp(-std::numbers::pi * std::numbers::pi * 0.1) / std::sqrt(2.0)).epsilon(1e-8));
}

TEST_CASE("cubic manufactured source") {
  const double alpha = 10.0;
  const ProblemSpec p = manufactured_cubic(alpha);
  const double pi = std::numbers::pi;
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double x = u(rng), t = 0.1 * u(rng);
    const double s = std::sin(pi * x);
    const double expected = (pi * pi - 1.0) * std::exp(-t) * s + alpha * std::exp(-3 * t) * s * s * s;
    CHECK(at(p.source, x, t) == doctest::Approx(expected).epsilon(1e-13));
  }
  for (int i = 0; i < 1000; ++i) {
    const double a = 4 * u(rng) - 2, b = 4 * u(rng) - 2;
    CHECK((f1(p, a) - f1(p, b)) * (a - b) >= 0.0);
    CHECK(df1(p, a) == doctest::Approx(3 * alpha * a * a));
  }
  CHECK(p.monotonicity.mu0 == 0.0);
  CHECK_THROWS_AS(manufactured_cubic(0.0), std::invalid_argument);
}

TEST_CASE("validation reports") {
  for (const char* name : {"heat", "cubic", "cubic:alpha=2.5"}) {
    const ValidationReport r = validate_spec(make_problem(name));
    CHECK(r.ok(1e-10));
    CHECK(r.residuals.size() == 1000);
  }
  const ValidationReport b = validate_spec(bistable());
  CHECK(b.monotonicity_violations == 0);
  CHECK(b.min_monotonicity_ratio >= -8125.0 / 3.0);
  CHECK(b.residuals.empty());

  ProblemSpec wrong = manufactured_linear_heat();
  wrong.source = [](double, double, std::span<double> o) { o[0] = 1.0; };
  const ValidationReport w = validate_spec(wrong);
  CHECK_FALSE(w.ok(1e-10));
  CHECK(w.max_residual == doctest::Approx(1.0).epsilon(1e-9));

  ProblemSpec understated = bistable();
  understated.monotonicity.mu0 = 1000.0;
  CHECK(validate_spec(understated).monotonicity_violations > 0);
}

TEST_CASE("registry") {
  CHECK(make_problem("bistable").name == "bistable");
  CHECK(make_problem("heat").name == "heat");
  CHECK(make_problem("cubic:alpha=3").name == "cubic:alpha=3");
  CHECK(make_problem("cubic").name == "cubic:alpha=10");
  CHECK_THROWS_AS(make_problem("wave"), std::invalid_argument);
  CHECK_THROWS_AS(make_problem("cubic:alpha=x"), std::invalid_argument);
  CHECK_THROWS_AS(make_problem("cubic:alpha=-1"), std::invalid_argument);
}
