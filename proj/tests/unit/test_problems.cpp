#include <cmath>

#include <doctest.h>

#include "esdirk/errors.hpp"
#include "esdirk/problems.hpp"

using namespace esdirk;

TEST_SUITE("problems") {

TEST_CASE("analytic references satisfy their equations") {
  for (const auto& tp : corpus()) {
    if (tp.reference != ReferenceKind::Analytic) continue;
    CAPTURE(tp.problem.name);
    REQUIRE(tp.exact);
    REQUIRE(tp.exact_derivative);
    CHECK((tp.exact(tp.problem.t0) - tp.problem.x0).cwiseAbs().maxCoeff() <= 1e-15);
    const double span = tp.problem.tf - tp.problem.t0;
    for (int i = 0; i < 100; ++i) {
      const double t = tp.problem.t0 + span * i / 99.0;
      const Vector x = tp.exact(t);
      const Vector f = tp.problem.rhs(t, x);
      const Vector lhs = tp.problem.mass ? Vector(*tp.problem.mass * tp.exact_derivative(t))
                                         : tp.exact_derivative(t);
      const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
      CHECK((lhs - f).cwiseAbs().maxCoeff() <= 1e-12 * scale);
      // The stated derivative is the derivative of the stated solution.
      const Vector xd = tp.exact_derivative(t);
      const double rate = std::max(1.0, xd.cwiseAbs().maxCoeff());
      const double dt = 1e-6 / rate;
      const Vector fd = (tp.exact(t + dt) - tp.exact(t - dt)) / (2 * dt);
      CHECK((fd - xd).cwiseAbs().maxCoeff() <= 1e-6 * rate);
    }
  }
}

TEST_CASE("forced linear solution by substitution") {
  const auto tp = make_problem("forced_linear");
  for (double t : {0.0, 0.25, 0.8, 1.0}) {
    const double x = 1.5 * std::exp(-t) + (std::sin(t) - std::cos(t)) / 2;
    const double xd = -1.5 * std::exp(-t) + (std::cos(t) + std::sin(t)) / 2;
    CHECK(tp.exact(t)(0) == doctest::Approx(x).epsilon(1e-15));
    CHECK(xd == doctest::Approx(-x + std::sin(t)).epsilon(1e-14));
  }
}

TEST_CASE("linear and Prothero-Robinson references") {
  const auto lin = make_problem("linear");
  CHECK(lin.exact(0.7)(0) == doctest::Approx(std::exp(-0.7)));
  const auto pr = make_problem("prothero_robinson");
  CHECK(pr.exact(0.4)(0) == doctest::Approx(std::sin(0.4)));
  CHECK(pr.stiff);
}

TEST_CASE("Robertson DAE shape") {
  const auto tp = make_problem("robertson_dae");
  CHECK(tp.problem.is_dae());
  CHECK(tp.problem.algebraic_equations() == std::vector<int>{2});
  CHECK(tp.problem.algebraic_variables() == std::vector<int>{2});
  CHECK(tp.problem.tf == 1e4);
  CHECK(tp.problem.x0.sum() == doctest::Approx(1.0));
  CHECK(tp.reference == ReferenceKind::Numerical);
}

TEST_CASE("corpus contents") {
  const auto& names = problem_names();
  for (const char* n : {"linear", "linear_stiff", "forced_linear", "vdp1", "vdp1000",
                        "prothero_robinson", "robertson_dae", "bouncing_ball",
                        "double_crossing"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  CHECK(corpus().size() == names.size());
  for (const auto& tp : corpus()) CHECK_NOTHROW(tp.problem.validate());
  CHECK_THROWS_AS(make_problem("lorenz"), NotFoundError);
}

}
