#include <cmath>
#include <vector>

#include <doctest.h>

#include "esdirk/dense_output.hpp"
#include "esdirk/errors.hpp"
#include "esdirk/integrator.hpp"
#include "esdirk/tableau.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace esdirk;

namespace {

using SC = SideCondition;
const double r2 = std::sqrt(2.0);

double max_abs_diff(const Matrix& a, const Matrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  return (a - b).cwiseAbs().maxCoeff();
}

// Largest interpolation error over a theta grid for one step of x' = -x
// from x = 1, measured against exp(-theta h).
double interpolation_error(const ButcherTableau& t, const ExtensionMatrix& em,
                           double h) {
  const auto p = testing::scalar_linear(-1.0);
  const auto out = testing::tight_step(t, p, h);
  double worst = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double theta = i / 20.0;
    const Vector x = eval_extension(em, p.x0, h, out.record.k, theta);
    worst = std::max(worst, std::abs(x(0) - std::exp(-theta * h)));
  }
  return worst;
}

}  // namespace

TEST_SUITE("dense_output") {

TEST_CASE("psi_bar rows") {
  const Matrix p12 = psi_bar(builtin("ESDIRK12"));
  CHECK(p12.rows() == 8);
  CHECK(p12(0, 0) == 1.0);
  CHECK(p12(0, 1) == 1.0);
  CHECK(p12(1, 0) == 0.0);
  CHECK(p12(1, 1) == 1.0);
  const auto t23 = builtin("ESDIRK23");
  const Matrix p23 = psi_bar(t23);
  CHECK(p23.rows() == 8);
  CHECK(p23(1, 0) == 0.0);
  CHECK(p23(1, 1) == doctest::Approx(2 * t23.gamma).epsilon(1e-15));
  CHECK(p23(1, 2) == 1.0);
  CHECK(psi_bar(builtin("ESDIRK45c")).rows() == 8);
}

TEST_CASE("ESDIRK12 extensions") {
  const auto t = builtin("ESDIRK12");
  const auto o1 = solve_extension(t, 1, {SC::endpoint_b()});
  CHECK(o1.mode == SolutionMode::Unique);
  Matrix e1(2, 1);
  e1 << 0, 1;
  CHECK(max_abs_diff(o1.b_bar, e1) <= 1e-15);

  const auto o2 = solve_extension(t, 2, {});
  CHECK(o2.mode == SolutionMode::Unique);
  Matrix e2(2, 2);
  e2 << 1, -0.5, 0, 0.5;
  CHECK(max_abs_diff(o2.b_bar, e2) <= 1e-15);
}

TEST_CASE("ESDIRK23 order 2 extension matching stage 2") {
  const auto t = builtin("ESDIRK23");
  const auto em = solve_extension(t, 2, {SC::endpoint_b(), SC::stage_match(2)});
  Matrix e(3, 2);
  e << r2 / 2, -r2 / 4, r2 / 2, -r2 / 4, 1 - r2, r2 / 2;
  CHECK(em.mode == SolutionMode::Unique);
  CHECK(max_abs_diff(em.b_bar, e) <= 1e-14);
}

TEST_CASE("ESDIRK23 order 3 extension") {
  const auto t = builtin("ESDIRK23");
  const auto em = solve_extension(t, 3, {SC::endpoint_bhat()});
  Matrix e(3, 3);
  e << 1, -1.35355339059327, 0.569035593728849,
       0, 2.06066017177982, -1.37377344785321,
       0, -0.707106781186547, 0.804737854124365;
  CHECK(max_abs_diff(em.b_bar, e) <= 1e-14);
  CHECK_THROWS_AS(solve_extension(t, 3, {SC::endpoint_b()}), InfeasibleError);
}

TEST_CASE("ESDIRK34 extensions") {
  const auto t = builtin("ESDIRK34");
  CHECK_THROWS_AS(solve_extension(t, 2, {SC::stage_match(2), SC::stage_match(3),
                                         SC::stage_match(4)}),
                  InfeasibleError);
  const auto mn = solve_extension(t, 3, {SC::endpoint_b()});
  CHECK(mn.mode == SolutionMode::MinNorm);
  CHECK(mn.rank < mn.unknowns);
  CHECK(mn.b_bar(0, 0) == doctest::Approx(0.969611875176691).epsilon(1e-12));
  CHECK(mn.b_bar(0, 1) == doctest::Approx(-1.53835725968354).epsilon(1e-12));
  CHECK(mn.b_bar(0, 2) == doctest::Approx(0.671144785126761).epsilon(1e-12));
  const auto b24 = solve_extension(t, 2, {SC::stage_match(2), SC::stage_match(4)});
  CHECK(b24.b_bar(0, 0) == doctest::Approx(3.20218915732655).epsilon(1e-12));
  CHECK(b24.b_bar(0, 1) == doctest::Approx(-3.09978975670664).epsilon(1e-12));
  const auto deriv = solve_extension(t, 3, {SC::endpoint_b(), SC::derivative_match(4)});
  CHECK(deriv.mode == SolutionMode::MinNormWithDerivative);
}

TEST_CASE("infeasibility names the offending block") {
  const auto t = builtin("ESDIRK34");
  try {
    solve_extension(t, 4, {});
    FAIL("expected infeasible");
  } catch (const InfeasibleError& e) {
    CHECK(e.residual() > 1e-9);
    CHECK(e.block().find("order") != std::string::npos);
  }
}

TEST_CASE("stored matrices") {
  const auto b24 = builtin_extension("ESDIRK34", "o2_24");
  CHECK(b24.b_bar(0, 0) == 3.20218915732655);
  CHECK(b24.b_bar(0, 1) == -3.09978975670664);
  const auto e43 = builtin_extension("ESDIRK43b", "o3_deriv");
  CHECK(e43.b_bar(4, 0) == 0.21957338881385);
  CHECK(e43.b_bar(4, 1) == -0.43914677762771);
  CHECK(e43.b_bar(4, 2) == 0.21957338881385);
  const auto e32b = builtin_extension("ESDIRK32b", "o2");
  Matrix e(4, 2);
  e << r2 / 2, -r2 / 4, r2 / 2, -r2 / 4, 1 - r2, r2 / 2, 0, 0;
  CHECK(max_abs_diff(e32b.b_bar, e) <= 1e-15);
  CHECK_THROWS_AS(builtin_extension("ESDIRK34", "o9"), NotFoundError);
}

TEST_CASE("every catalog matrix satisfies its conditions and re-derives") {
  for (const auto& [method, variant] : extension_catalog()) {
    CAPTURE(method);
    CAPTURE(variant);
    const auto t = builtin(method);
    const auto em = builtin_extension(method, variant);
    const auto chk = check_extension(t, em);
    CHECK(chk.passed);
    CHECK(chk.order_residual <= 1e-10);
    CHECK(chk.side_residual <= 1e-10);
    if (!em.derivation) continue;
    const auto fresh = solve_extension(t, em.order, em.side_conditions);
    CHECK(fresh.mode == *em.derivation);
    const double tol = *em.derivation == SolutionMode::Unique ? 1e-10 : 1e-8;
    CHECK(max_abs_diff(fresh.b_bar, em.b_bar) <= tol);
  }
}

TEST_CASE("known infeasible combinations") {
  int count = 0;
  for (const auto& name : builtin_names()) {
    const auto t = builtin(name);
    for (const auto& c : known_infeasible_extensions(name)) {
      CAPTURE(name);
      CHECK_THROWS_AS(solve_extension(t, c.order, c.conditions), InfeasibleError);
      ++count;
    }
  }
  CHECK(count >= 11);
}

TEST_CASE("evaluation endpoints") {
  const auto t = builtin("ESDIRK34");
  const auto p = testing::van_der_pol(1.0, (Vector(2) << 2.0, 0.0).finished(), 1.0);
  const double h = 0.05;
  const auto out = testing::tight_step(t, p, h);
  for (const auto& variant : {"o3_minnorm", "o3_deriv", "o3_mincurv"}) {
    const auto em = builtin_extension("ESDIRK34", variant);
    CHECK(eval_extension(em, p.x0, h, out.record.k, 0.0) == p.x0);
    const Vector x1 = eval_extension(em, p.x0, h, out.record.k, 1.0);
    CHECK((x1 - out.record.x_next).cwiseAbs().maxCoeff() <= 1e-13);
  }
  const auto em = builtin_extension("ESDIRK34", "o3_deriv");
  CHECK_THROWS_AS(eval_extension(em, p.x0, h, out.record.k, 1.5), OutOfRangeError);
  CHECK_THROWS_AS(eval_extension(em, p.x0, h, out.record.k, -0.1), OutOfRangeError);
}

TEST_CASE("stage-matching extension reproduces the stage value") {
  const auto t = builtin("ESDIRK23");
  const auto p = testing::van_der_pol(1.0, (Vector(2) << 2.0, 0.0).finished(), 1.0);
  const double h = 0.1;
  const auto out = testing::tight_step(t, p, h);
  const Matrix& k = out.record.k;
  const Vector x2 = p.x0 + h * (t.a(1, 0) * k.row(0) + t.a(1, 1) * k.row(1)).transpose();
  const auto em = builtin_extension("ESDIRK23", "o2");
  const Vector xb = eval_extension(em, p.x0, h, k, t.c(1));
  CHECK((xb - x2).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("derivative of the weights") {
  const auto em = builtin_extension("ESDIRK12", "o2");
  // b_bar(theta) = (theta - theta^2/2, theta^2/2).
  const Vector d = extension_weights_derivative(em, 0.3);
  CHECK(d(0) == doctest::Approx(0.7));
  CHECK(d(1) == doctest::Approx(0.3));
  const Vector w = extension_weights(em, 0.3);
  CHECK(w(0) == doctest::Approx(0.3 - 0.045));
}

TEST_CASE("interpolation error decays as h^(q+1)") {
  struct Case {
    const char* method;
    const char* variant;
    double expected;
  };
  const Case cases[] = {{"ESDIRK23", "o3", 4.0}, {"ESDIRK34", "o3_deriv", 4.0},
                        {"ESDIRK34", "o3_minnorm", 4.0}, {"ESDIRK23", "o2", 3.0},
                        {"ESDIRK12", "o2", 3.0}};
  for (const auto& c : cases) {
    CAPTURE(c.method);
    CAPTURE(c.variant);
    const auto t = builtin(c.method);
    const auto em = builtin_extension(c.method, c.variant);
    std::vector<double> hs{0.2, 0.1, 0.05}, errs;
    for (double h : hs) errs.push_back(interpolation_error(t, em, h));
    const double slope = oracle::loglog_slope(hs, errs);
    CHECK(std::abs(slope - c.expected) <= 0.3);
  }
}

TEST_CASE("default extensions") {
  CHECK(default_extension("ESDIRK34")->variant == "o3_deriv");
  CHECK(default_extension("ESDIRK23").has_value());
  CHECK_FALSE(default_extension("ESDIRK45c").has_value());
  CHECK_FALSE(default_extension("ESDIRK32c").has_value());
}

}
