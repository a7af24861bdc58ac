#pragma once

#include <cmath>

#include "esdirk/integrator.hpp"
#include "esdirk/problem.hpp"

namespace esdirk::testing {

// x' = lambda x on [0, tf].
inline IvpProblem scalar_linear(double lambda, double x0 = 1.0, double tf = 1.0) {
  IvpProblem p;
  p.name = "scalar_linear";
  p.rhs = [lambda](double, const Vector& x) -> Vector { return lambda * x; };
  p.jacobian = [lambda](double, const Vector&) -> Matrix {
    return Matrix::Constant(1, 1, lambda);
  };
  p.x0 = Vector::Constant(1, x0);
  p.tf = tf;
  return p;
}

inline IvpProblem van_der_pol(double mu, Vector x0, double tf) {
  IvpProblem p;
  p.name = "van_der_pol";
  p.rhs = [mu](double, const Vector& x) -> Vector {
    Vector f(2);
    f << x(1), mu * (1 - x(0) * x(0)) * x(1) - x(0);
    return f;
  };
  p.jacobian = [mu](double, const Vector& x) -> Matrix {
    Matrix j(2, 2);
    j << 0, 1, -2 * mu * x(0) * x(1) - 1, mu * (1 - x(0) * x(0));
    return j;
  };
  p.x0 = std::move(x0);
  p.tf = tf;
  return p;
}

// One step with Newton tolerances tight enough that the stage equations are
// solved to rounding.
inline StepOutcome tight_step(const ButcherTableau& t, const IvpProblem& p,
                              double h, double tol = 1e-14) {
  Controls c;
  c.rtol = tol;
  c.atol = Vector::Constant(1, tol);
  Stepper stepper(t, p, c);
  const Vector k1 = p.rhs(p.t0, p.x0);
  return stepper.step(p.t0, p.x0, h, k1);
}

}  // namespace esdirk::testing
