#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "esdirk/tableau.hpp"

namespace esdirk {

enum class WeightOp { MultiplyByC, MultiplyByA };

/// One of the eight rooted trees of order at most 4.
///
/// `recipe` spells Lambda(tau) left to right as a product of C = diag(c)
/// and A factors; Psi(tau) = Lambda(tau) e is obtained by applying the
/// factors right to left.
struct RootedTree {
  int id;  // 1..8
  int order;
  int sigma;
  int density;
  std::vector<WeightOp> recipe;
  std::string label;  // e.g. "CAC"
};

inline constexpr int kMaxTreeOrder = 4;
inline constexpr double kOrderTolerance = 1e-12;
inline constexpr double kEmbeddedResidualTolerance = 1e-10;
inline constexpr double kRankThreshold = 1e-12;

/// Trees in the fixed order I, C, C^2, AC, C^3, CAC, AC^2, A^2C.
const std::array<RootedTree, 8>& rooted_trees();

/// Number of trees of order <= p.
int tree_count(int p);

Vector psi_vector(const ButcherTableau& t, const RootedTree& tree);

/// Phi(tau) = weights' Psi(tau).
double elementary_weight(const ButcherTableau& t, const Vector& weights,
                         const RootedTree& tree);

struct TreeCheck {
  int tree_id;
  int tree_order;
  double phi;
  double target;  // 1 / gamma(tau)
  double residual;
  bool passed;
};

struct OrderReport {
  int claimed_order = 0;
  bool passed = false;
  std::vector<TreeCheck> trees;  // every tree of order <= claimed (+1 if <= 4)
  // Whether every condition at claimed_order + 1 holds. Empty when
  // claimed_order is already 4.
  std::optional<bool> next_order_holds;
  // Largest order p' <= 4 for which all conditions of order <= p' hold.
  int observed_order = 0;
};

/// Checks |Phi(tau) - 1/gamma(tau)| <= 1e-12 for all trees of order <=
/// claimed_p. Throws UnsupportedOrderError for claimed_p > 4.
OrderReport verify_order(const ButcherTableau& t, const Vector& weights,
                         int claimed_p);

struct EmbeddedSolution {
  Vector weights;
  double residual = 0.0;  // 2-norm of Psi_bar w - rhs
  int rank = 0;
  int rows = 0;
};

/// Least-squares solve of the stacked order conditions of order <=
/// target_p for quadrature weights. `fixed` pins selected weights (index,
/// value), which removes them from the unknowns; use it for structural
/// zeros such as the trailing weight of a stiffly accurate embedded row.
/// Throws InfeasibleError when the residual exceeds 1e-10.
EmbeddedSolution solve_embedded_weights(
    const ButcherTableau& t, int target_p,
    const std::map<int, double>& fixed = {});

/// Stacked rows Psi(tau)' for trees of order <= p, with their targets.
Matrix order_condition_matrix(const ButcherTableau& t, int p);
Vector order_condition_rhs(int p);

}  // namespace esdirk
