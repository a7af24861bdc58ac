#include <cmath>
#include <random>

#include <doctest.h>

#include "esdirk/errors.hpp"
#include "esdirk/order_conditions.hpp"
#include "esdirk/tableau.hpp"
#include "oracles.hpp"

using namespace esdirk;

TEST_SUITE("order_conditions") {

TEST_CASE("tree table") {
  const auto& trees = rooted_trees();
  const int order[] = {1, 2, 3, 3, 4, 4, 4, 4};
  const int sigma[] = {1, 1, 2, 1, 6, 1, 2, 1};
  const int density[] = {1, 2, 3, 6, 4, 8, 12, 24};
  for (int i = 0; i < 8; ++i) {
    CHECK(trees[i].id == i + 1);
    CHECK(trees[i].order == order[i]);
    CHECK(trees[i].sigma == sigma[i]);
    CHECK(trees[i].density == density[i]);
  }
  CHECK(tree_count(1) == 1);
  CHECK(tree_count(2) == 2);
  CHECK(tree_count(3) == 4);
  CHECK(tree_count(4) == 8);
}

TEST_CASE("psi vectors on small tableaus") {
  const auto t23 = builtin("ESDIRK23");
  const auto& trees = rooted_trees();
  CHECK(psi_vector(t23, trees[0]) == Vector::Ones(3));
  const Vector ce = psi_vector(t23, trees[1]);
  CHECK(ce(0) == 0.0);
  CHECK(ce(1) == doctest::Approx(0.5857864376269049));
  CHECK(ce(2) == 1.0);
  // A C e for implicit Euler: A (0, 1)' = (0, gamma) = (0, 1).
  const Vector ace = psi_vector(builtin("ESDIRK12"), trees[3]);
  CHECK(ace(0) == 0.0);
  CHECK(ace(1) == 1.0);
}

TEST_CASE("elementary weights of builtins") {
  const auto& trees = rooted_trees();
  const auto t34 = builtin("ESDIRK34");
  CHECK(elementary_weight(t34, t34.b, trees[0]) == doctest::Approx(1.0).epsilon(1e-15));
  const auto t23 = builtin("ESDIRK23");
  CHECK(elementary_weight(t23, t23.b, trees[1]) == doctest::Approx(0.5).epsilon(1e-15));
  // Order 3 advancing weights miss b'C^3 e = 1/4.
  CHECK(std::abs(elementary_weight(t34, t34.b, trees[4]) - 0.25) > 1e-6);
}

TEST_CASE("recipes agree with explicit index sums on random tableaus") {
  std::mt19937 rng(20261016);
  const auto& trees = rooted_trees();
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = oracle::random_esdirk(rng, 4);
    for (const auto& tree : trees) {
      const double lib = elementary_weight(t, t.b, tree);
      const double ref = oracle::phi(t.a, t.c, t.b, tree.id);
      CHECK(std::abs(lib - ref) <= 1e-13 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("orders of the advancing and embedded weights") {
  struct Case {
    const char* name;
    int p, p_hat;
  };
  const Case cases[] = {{"ESDIRK12", 1, 2}, {"ESDIRK23", 2, 3}, {"ESDIRK34", 3, 4},
                        {"ESDIRK32a", 3, 2}, {"ESDIRK32b", 2, 3}, {"ESDIRK43b", 3, 4}};
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const auto t = builtin(c.name);
    const auto adv = verify_order(t, t.b, c.p);
    CHECK(adv.passed);
    CHECK(adv.observed_order == c.p);
    if (c.p < 4) CHECK(adv.next_order_holds == false);
    const auto emb = verify_order(t, *t.b_hat, c.p_hat);
    CHECK(emb.passed);
    CHECK(emb.observed_order == c.p_hat);
    for (const auto& tc : emb.trees)
      if (tc.tree_order <= c.p_hat) CHECK(tc.residual <= 1e-12);
  }
}

TEST_CASE("ESDIRK34 embedded weights pass all eight conditions") {
  const auto t = builtin("ESDIRK34");
  const auto rep = verify_order(t, *t.b_hat, 4);
  CHECK(rep.passed);
  CHECK(rep.trees.size() == 8);
  CHECK_FALSE(rep.next_order_holds.has_value());
}

TEST_CASE("passing order p implies passing every lower order") {
  std::mt19937 rng(7);
  for (const auto& name : builtin_names()) {
    const auto t = builtin(name);
    for (int p = 1; p <= 4; ++p) {
      if (verify_order(t, t.b, p).passed) {
        for (int q = 1; q < p; ++q) CHECK(verify_order(t, t.b, q).passed);
      }
    }
  }
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = oracle::random_esdirk(rng, 4);
    for (int p = 2; p <= 4; ++p)
      if (verify_order(t, t.b, p).passed) CHECK(verify_order(t, t.b, p - 1).passed);
  }
}

TEST_CASE("claimed order above four") {
  const auto t = builtin("ESDIRK34");
  CHECK_THROWS_AS(verify_order(t, t.b, 5), UnsupportedOrderError);
}

TEST_CASE("embedded weights from the order conditions") {
  const auto t12 = builtin("ESDIRK12");
  const auto s12 = solve_embedded_weights(t12, 2);
  CHECK(s12.weights(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s12.weights(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s12.residual <= 1e-15);

  const auto t34 = builtin("ESDIRK34");
  const auto s34 = solve_embedded_weights(t34, 4);
  CHECK((s34.weights - *t34.b_hat).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(s34.residual <= 1e-12);

  // Four order-3 rows on three unknowns: one of them is dependent.
  const auto t23 = builtin("ESDIRK23");
  const auto s23 = solve_embedded_weights(t23, 3);
  CHECK(s23.rows == 4);
  CHECK(s23.rank == 3);
  CHECK(std::abs(s23.weights(0) - 0.2155) < 5e-5);
  CHECK(std::abs(s23.weights(1) - 0.6869) < 5e-5);
  CHECK(std::abs(s23.weights(2) - 0.0976) < 5e-5);
  CHECK((s23.weights - *t23.b_hat).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("infeasible embedded order") {
  // Three stages cannot carry order 4.
  const auto t = builtin("ESDIRK23");
  CHECK_THROWS_AS(solve_embedded_weights(t, 4), InfeasibleError);
}

}
