#include "esdirk/problems.hpp"

#include <cmath>

#include <fmt/format.h>

#include "esdirk/errors.hpp"

namespace esdirk {

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

TestProblem linear(const std::string& name, double lambda, double tf) {
  TestProblem p;
  p.problem.name = name;
  p.problem.rhs = [lambda](double, const Vector& x) -> Vector { return lambda * x; };
  p.problem.jacobian = [lambda](double, const Vector&) -> Matrix {
    return Matrix::Constant(1, 1, lambda);
  };
  p.problem.x0 = v1(1.0);
  p.problem.tf = tf;
  p.reference = ReferenceKind::Analytic;
  p.exact = [lambda](double t) { return v1(std::exp(lambda * t)); };
  p.exact_derivative = [lambda](double t) { return v1(lambda * std::exp(lambda * t)); };
  p.stiff = lambda < -1e3;
  p.notes = fmt::format("x' = {} x, x(0) = 1", lambda);
  return p;
}

TestProblem forced_linear() {
  TestProblem p;
  p.problem.name = "forced_linear";
  p.problem.rhs = [](double t, const Vector& x) -> Vector {
    return v1(-x(0) + std::sin(t));
  };
  p.problem.jacobian = [](double, const Vector&) -> Matrix {
    return Matrix::Constant(1, 1, -1.0);
  };
  p.problem.x0 = v1(1.0);
  p.problem.tf = 1.0;
  p.reference = ReferenceKind::Analytic;
  p.exact = [](double t) {
    return v1(1.5 * std::exp(-t) + 0.5 * (std::sin(t) - std::cos(t)));
  };
  p.exact_derivative = [](double t) {
    return v1(-1.5 * std::exp(-t) + 0.5 * (std::cos(t) + std::sin(t)));
  };
  p.notes = "x' = -x + sin t, x(0) = 1";
  return p;
}

TestProblem van_der_pol(const std::string& name, double mu, double tf) {
  TestProblem p;
  p.problem.name = name;
  p.problem.rhs = [mu](double, const Vector& x) -> Vector {
    return v2(x(1), mu * (1.0 - x(0) * x(0)) * x(1) - x(0));
  };
  p.problem.jacobian = [mu](double, const Vector& x) -> Matrix {
    Matrix j(2, 2);
    j << 0.0, 1.0, -2.0 * mu * x(0) * x(1) - 1.0, mu * (1.0 - x(0) * x(0));
    return j;
  };
  p.problem.x0 = v2(2.0, 0.0);
  p.problem.tf = tf;
  p.stiff = mu > 100.0;
  p.notes = fmt::format("Van der Pol oscillator, mu = {}", mu);
  return p;
}

TestProblem prothero_robinson() {
  static constexpr double lambda = -1e6;
  TestProblem p;
  p.problem.name = "prothero_robinson";
  p.problem.rhs = [](double t, const Vector& x) -> Vector {
    return v1(lambda * (x(0) - std::sin(t)) + std::cos(t));
  };
  p.problem.jacobian = [](double, const Vector&) -> Matrix {
    return Matrix::Constant(1, 1, lambda);
  };
  p.problem.x0 = v1(0.0);
  p.problem.tf = 1.0;
  p.reference = ReferenceKind::Analytic;
  p.exact = [](double t) { return v1(std::sin(t)); };
  p.exact_derivative = [](double t) { return v1(std::cos(t)); };
  p.stiff = true;
  p.notes = "x' = lambda (x - sin t) + cos t, lambda = -1e6";
  return p;
}

TestProblem robertson_dae() {
  TestProblem p;
  p.problem.name = "robertson_dae";
  p.problem.rhs = [](double, const Vector& x) -> Vector {
    Vector f(3);
    f << -0.04 * x(0) + 1e4 * x(1) * x(2),
        0.04 * x(0) - 1e4 * x(1) * x(2) - 3e7 * x(1) * x(1),
        x(0) + x(1) + x(2) - 1.0;
    return f;
  };
  p.problem.jacobian = [](double, const Vector& x) -> Matrix {
    Matrix j(3, 3);
    j << -0.04, 1e4 * x(2), 1e4 * x(1),
        0.04, -1e4 * x(2) - 6e7 * x(1), -1e4 * x(1),
        1.0, 1.0, 1.0;
    return j;
  };
  p.problem.mass = Matrix::Identity(3, 3);
  (*p.problem.mass)(2, 2) = 0.0;
  Vector x0(3);
  x0 << 1.0, 0.0, 0.0;
  p.problem.x0 = x0;
  p.problem.tf = 1e4;
  p.stiff = true;
  p.notes = "Robertson kinetics with the conservation law as algebraic row";
  return p;
}

TestProblem bouncing_ball() {
  static constexpr double g = 9.81;
  TestProblem p;
  p.problem.name = "bouncing_ball";
  p.problem.rhs = [](double, const Vector& x) -> Vector { return v2(x(1), -g); };
  p.problem.jacobian = [](double, const Vector&) -> Matrix {
    Matrix j(2, 2);
    j << 0.0, 1.0, 0.0, 0.0;
    return j;
  };
  p.problem.x0 = v2(1.0, 0.0);
  p.problem.tf = 3.5;
  EventSpec impact;
  impact.name = "impact";
  impact.guard = [](double, const Vector& x) { return x(0); };
  impact.direction = Direction::Down;
  impact.action = [](double, const Vector& x) { return v2(x(0), -0.9 * x(1)); };
  p.problem.events.push_back(impact);
  p.notes = "height/velocity, g = 9.81, rebound v <- -0.9 v, 5 impacts";
  return p;
}

TestProblem linear_crossing() {
  TestProblem p;
  p.problem.name = "linear_crossing";
  p.problem.rhs = [](double, const Vector&) -> Vector { return v1(1.0); };
  p.problem.jacobian = [](double, const Vector&) -> Matrix { return Matrix::Zero(1, 1); };
  p.problem.x0 = v1(-0.5);
  p.problem.tf = 1.0;
  p.problem.events.push_back({[](double, const Vector& x) { return x(0); },
                              Direction::Any, false, {}, "zero"});
  p.reference = ReferenceKind::Analytic;
  p.exact = [](double t) { return v1(t - 0.5); };
  p.exact_derivative = [](double) { return v1(1.0); };
  p.notes = "x' = 1, x(0) = -0.5, guard x, crossing at t = 0.5";
  return p;
}

TestProblem double_crossing() {
  TestProblem p;
  p.problem.name = "double_crossing";
  p.problem.rhs = [](double, const Vector&) -> Vector { return v1(1.0); };
  p.problem.jacobian = [](double, const Vector&) -> Matrix { return Matrix::Zero(1, 1); };
  p.problem.x0 = v1(0.0);
  p.problem.tf = 1.0;
  p.problem.events.push_back(
      {[](double, const Vector& x) { return (x(0) - 0.3) * (x(0) - 0.6); },
       Direction::Any, false, {}, "band"});
  p.reference = ReferenceKind::Analytic;
  p.exact = [](double t) { return v1(t); };
  p.exact_derivative = [](double) { return v1(1.0); };
  p.notes = "x' = 1, guard (x - 0.3)(x - 0.6) crosses at t = 0.3 and 0.6";
  return p;
}

TestProblem sine_crossing() {
  TestProblem p;
  p.problem.name = "sine_crossing";
  p.problem.rhs = [](double t, const Vector&) -> Vector { return v1(std::cos(t)); };
  p.problem.jacobian = [](double, const Vector&) -> Matrix { return Matrix::Zero(1, 1); };
  p.problem.x0 = v1(0.0);
  p.problem.tf = 1.0;
  p.problem.events.push_back({[](double, const Vector& x) { return x(0) - 0.5; },
                              Direction::Up, true, {}, "half"});
  p.reference = ReferenceKind::Analytic;
  p.exact = [](double t) { return v1(std::sin(t)); };
  p.exact_derivative = [](double t) { return v1(std::cos(t)); };
  p.notes = "x' = cos t, x(0) = 0, terminal guard x - 1/2 at t = pi/6";
  return p;
}

}  // namespace

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{
      "linear",          "linear_stiff",    "forced_linear",
      "vdp1",            "vdp1000",         "prothero_robinson",
      "robertson_dae",   "bouncing_ball",   "linear_crossing",
      "double_crossing", "sine_crossing"};
  return names;
}

TestProblem make_problem(std::string_view name) {
  if (name == "linear") return linear("linear", -1.0, 1.0);
  if (name == "linear_stiff") return linear("linear_stiff", -1e6, 1.0);
  if (name == "forced_linear") return forced_linear();
  if (name == "vdp1") return van_der_pol("vdp1", 1.0, 20.0);
  if (name == "vdp1000") return van_der_pol("vdp1000", 1000.0, 3000.0);
  if (name == "prothero_robinson") return prothero_robinson();
  if (name == "robertson_dae") return robertson_dae();
  if (name == "bouncing_ball") return bouncing_ball();
  if (name == "linear_crossing") return linear_crossing();
  if (name == "double_crossing") return double_crossing();
  if (name == "sine_crossing") return sine_crossing();
  throw NotFoundError(fmt::format("unknown problem '{}'; valid names: {}", name,
                                  fmt::join(problem_names(), ", ")));
}

std::vector<TestProblem> corpus() {
  std::vector<TestProblem> out;
  for (const auto& name : problem_names()) out.push_back(make_problem(name));
  return out;
}

std::vector<double> bounce_times(int count, double h0, double g, double e) {
  std::vector<double> times;
  double t = std::sqrt(2.0 * h0 / g);
  double v = g * t;  // impact speed
  for (int k = 0; k < count; ++k) {
    times.push_back(t);
    v *= e;
    t += 2.0 * v / g;
  }
  return times;
}

}  // namespace esdirk
