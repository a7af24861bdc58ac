#include <cmath>

#include <doctest.h>

#include "esdirk/errors.hpp"
#include "esdirk/stage_solver.hpp"
#include "esdirk/tableau.hpp"
#include "helpers.hpp"

using namespace esdirk;

namespace {

// x' = -x, 0 = y - x^2 with M = diag(1, 0).
IvpProblem small_dae(double y0) {
  IvpProblem p;
  p.name = "small_dae";
  p.rhs = [](double, const Vector& z) -> Vector {
    Vector f(2);
    f << -z(0), z(1) - z(0) * z(0);
    return f;
  };
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  p.mass = m;
  p.x0 = (Vector(2) << 1.0, y0).finished();
  return p;
}

}  // namespace

TEST_SUITE("stage_solver") {

TEST_CASE("linear stage converges in one iteration once the rate is known") {
  const auto p = testing::scalar_linear(-3.0);
  StageSolver solver(p);
  const double h = 0.1, gamma = 0.435866521508459;
  const Vector psi = Vector::Constant(1, 0.7);
  const Vector w = Vector::Constant(1, 1e-8);
  solver.prepare(0.0, p.x0, h, gamma);
  // Exact solution of X - psi = h gamma (-3 X).
  const double exact = 0.7 / (1.0 + 3.0 * h * gamma);
  const auto first = solver.solve_stage(0.1, psi, h, gamma, psi, w);
  CHECK(first.report.converged);
  CHECK(std::abs(first.x(0) - exact) <= 1e-15);
  const auto second = solver.solve_stage(0.1, psi, h, gamma, psi, w);
  CHECK(second.report.converged);
  CHECK(second.report.iterations == 1);
  CHECK(std::abs(second.x(0) - exact) <= 1e-15);
}

TEST_CASE("Van der Pol stage at moderate step") {
  const auto p = testing::van_der_pol(10.0, (Vector(2) << 2.0, 0.0).finished(), 1.0);
  StageSolver solver(p);
  const double h = 0.01, gamma = 0.435866521508459;
  const Vector w = Vector::Constant(2, 1e-6) + 1e-6 * p.x0.cwiseAbs();
  solver.prepare(0.0, p.x0, h, gamma);
  const Vector f0 = p.rhs(0.0, p.x0);
  const Vector psi = p.x0 + h * gamma * f0;
  const auto r = solver.solve_stage(2 * gamma * h, psi, h, gamma, p.x0 + 2 * gamma * h * f0, w);
  CHECK(r.report.converged);
  CHECK(r.report.iterations <= 5);
  // K recovery identity.
  const Vector res = r.k - p.rhs(2 * gamma * h, r.x);
  CHECK((res.array() / w.array()).abs().maxCoeff() <= 1.0);
}

TEST_CASE("iteration with a zero Jacobian diverges on a stiff stage") {
  auto p = testing::scalar_linear(-1e6);
  p.jacobian = [](double, const Vector&) -> Matrix { return Matrix::Zero(1, 1); };
  StageSolver solver(p);
  const double h = 1.0, gamma = 0.5;
  solver.prepare(0.0, p.x0, h, gamma);
  const auto r = solver.solve_stage(0.5, p.x0, h, gamma, p.x0,
                                    Vector::Constant(1, 1e-6));
  CHECK_FALSE(r.report.converged);
  CHECK(r.report.rate >= 1.0);
}

TEST_CASE("identity mass matrix matches the ODE path") {
  const auto ode = testing::van_der_pol(5.0, (Vector(2) << 2.0, 0.0).finished(), 1.0);
  auto dae = ode;
  dae.mass = Matrix::Identity(2, 2);
  StageSolver s1(ode), s2(dae);
  const double h = 0.02, gamma = 0.29289321881345254;
  const Vector w = Vector::Constant(2, 1e-10);
  s1.prepare(0.0, ode.x0, h, gamma);
  s2.prepare(0.0, ode.x0, h, gamma);
  const Vector psi = ode.x0 + h * gamma * ode.rhs(0.0, ode.x0);
  const auto r1 = s1.solve_stage(2 * gamma * h, psi, h, gamma, psi, w);
  const auto r2 = s2.solve_stage(2 * gamma * h, psi, h, gamma, psi, w);
  CHECK((r1.x - r2.x).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("finite-difference Jacobian") {
  const auto p = testing::van_der_pol(3.0, (Vector(2) << 1.5, -0.4).finished(), 1.0);
  const Vector fx = p.rhs(0.0, p.x0);
  const Matrix fd = finite_difference_jacobian(p.rhs, 0.0, p.x0, fx);
  const Matrix exact = p.jacobian(0.0, p.x0);
  CHECK((fd - exact).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("Jacobian reuse across nearby steps") {
  const auto p = testing::van_der_pol(1.0, (Vector(2) << 2.0, 0.0).finished(), 1.0);
  StageSolver solver(p);
  solver.prepare(0.0, p.x0, 0.1, 0.4);
  const auto evals = solver.counters().jacobian_evals;
  const auto facts = solver.counters().factorizations;
  solver.note_step();
  solver.prepare(0.1, p.x0, 0.11, 0.4);  // within 20 %
  CHECK(solver.counters().jacobian_evals == evals);
  CHECK(solver.counters().factorizations == facts);
  solver.prepare(0.2, p.x0, 0.2, 0.4);  // drift: refactor only
  CHECK(solver.counters().jacobian_evals == evals);
  CHECK(solver.counters().factorizations == facts + 1);
  solver.invalidate_jacobian();
  solver.prepare(0.3, p.x0, 0.2, 0.4);
  CHECK(solver.counters().jacobian_evals == evals + 1);
}

TEST_CASE("initial derivative") {
  const auto ode = testing::scalar_linear(-1.0);
  CHECK(initial_derivative(ode, 0.0, ode.x0)(0) == -1.0);

  const auto dae = small_dae(1.0);
  const Vector xd = initial_derivative(dae, 0.0, dae.x0);
  CHECK(xd(0) == doctest::Approx(-1.0));
  CHECK(xd(1) == doctest::Approx(-2.0).epsilon(1e-6));

  const auto bad = small_dae(2.0);
  CHECK_THROWS_AS(initial_derivative(bad, 0.0, bad.x0), InconsistentInitialConditions);
}

TEST_CASE("singular algebraic block") {
  IvpProblem p;
  p.name = "index2";
  // 0 = x - 1 does not involve y.
  p.rhs = [](double, const Vector& z) -> Vector {
    Vector f(2);
    f << z(1), z(0) - 1.0;
    return f;
  };
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  p.mass = m;
  p.x0 = (Vector(2) << 1.0, 0.0).finished();
  CHECK_THROWS_AS(initial_derivative(p, 0.0, p.x0), NotIndexOneError);
}

}
