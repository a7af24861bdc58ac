#include "esdirk/order_conditions.hpp"

#include <cmath>

#include <fmt/format.h>

#include "esdirk/errors.hpp"
#include "linalg.hpp"

namespace esdirk {

namespace {

using enum WeightOp;

void require_supported(int p) {
  if (p > kMaxTreeOrder) {
    throw UnsupportedOrderError(fmt::format(
        "order {} requested; trees are tabulated up to order {}", p,
        kMaxTreeOrder));
  }
}

}  // namespace

const std::array<RootedTree, 8>& rooted_trees() {
  static const std::array<RootedTree, 8> trees{{
      {1, 1, 1, 1, {}, "I"},
      {2, 2, 1, 2, {MultiplyByC}, "C"},
      {3, 3, 2, 3, {MultiplyByC, MultiplyByC}, "C^2"},
      {4, 3, 1, 6, {MultiplyByA, MultiplyByC}, "AC"},
      {5, 4, 6, 4, {MultiplyByC, MultiplyByC, MultiplyByC}, "C^3"},
      {6, 4, 1, 8, {MultiplyByC, MultiplyByA, MultiplyByC}, "CAC"},
      {7, 4, 2, 12, {MultiplyByA, MultiplyByC, MultiplyByC}, "AC^2"},
      {8, 4, 1, 24, {MultiplyByA, MultiplyByA, MultiplyByC}, "A^2C"},
  }};
  return trees;
}

int tree_count(int p) {
  static constexpr int counts[] = {0, 1, 2, 4, 8};
  if (p < 0) return 0;
  return counts[std::min(p, kMaxTreeOrder)];
}

Vector psi_vector(const ButcherTableau& t, const RootedTree& tree) {
  Vector v = Vector::Ones(t.stages());
  for (auto it = tree.recipe.rbegin(); it != tree.recipe.rend(); ++it) {
    if (*it == MultiplyByC)
      v = t.c.cwiseProduct(v);
    else
      v = t.a * v;
  }
  return v;
}

double elementary_weight(const ButcherTableau& t, const Vector& weights,
                         const RootedTree& tree) {
  return weights.dot(psi_vector(t, tree));
}

OrderReport verify_order(const ButcherTableau& t, const Vector& weights,
                         int claimed_p) {
  require_supported(claimed_p);
  OrderReport report;
  report.claimed_order = claimed_p;
  report.passed = true;

  std::array<bool, kMaxTreeOrder + 1> order_ok{};
  order_ok.fill(true);
  for (const auto& tree : rooted_trees()) {
    const double phi = elementary_weight(t, weights, tree);
    const double target = 1.0 / tree.density;
    const double residual = std::abs(phi - target);
    const bool ok = residual <= kOrderTolerance;
    if (!ok) order_ok[tree.order] = false;
    if (tree.order <= std::min(claimed_p + 1, kMaxTreeOrder))
      report.trees.push_back({tree.id, tree.order, phi, target, residual, ok});
    if (tree.order <= claimed_p && !ok) report.passed = false;
  }
  if (claimed_p < kMaxTreeOrder) report.next_order_holds = order_ok[claimed_p + 1];
  for (int p = 1; p <= kMaxTreeOrder && order_ok[p]; ++p) report.observed_order = p;
  return report;
}

Matrix order_condition_matrix(const ButcherTableau& t, int p) {
  require_supported(p);
  const int m = tree_count(p);
  Matrix psi(m, t.stages());
  for (int k = 0; k < m; ++k)
    psi.row(k) = psi_vector(t, rooted_trees()[k]).transpose();
  return psi;
}

Vector order_condition_rhs(int p) {
  require_supported(p);
  const int m = tree_count(p);
  Vector rhs(m);
  for (int k = 0; k < m; ++k) rhs(k) = 1.0 / rooted_trees()[k].density;
  return rhs;
}

EmbeddedSolution solve_embedded_weights(const ButcherTableau& t, int target_p,
                                        const std::map<int, double>& fixed) {
  const Matrix full = order_condition_matrix(t, target_p);
  Vector rhs = order_condition_rhs(target_p);
  const int s = t.stages();

  std::vector<int> free_cols;
  for (int j = 0; j < s; ++j) {
    if (auto it = fixed.find(j); it != fixed.end())
      rhs -= full.col(j) * it->second;
    else
      free_cols.push_back(j);
  }
  Matrix reduced(full.rows(), static_cast<Eigen::Index>(free_cols.size()));
  for (std::size_t k = 0; k < free_cols.size(); ++k)
    reduced.col(static_cast<Eigen::Index>(k)) = full.col(free_cols[k]);

  const auto sol = detail::min_norm_solve(reduced, rhs, kRankThreshold);
  const Vector& y = sol.x;

  EmbeddedSolution out;
  out.weights = Vector::Zero(s);
  for (std::size_t k = 0; k < free_cols.size(); ++k)
    out.weights(free_cols[k]) = y(static_cast<Eigen::Index>(k));
  for (const auto& [j, v] : fixed) out.weights(j) = v;
  out.residual = (full * out.weights - order_condition_rhs(target_p)).norm();
  out.rank = sol.rank;
  out.rows = static_cast<int>(full.rows());
  if (out.residual > kEmbeddedResidualTolerance) {
    throw InfeasibleError(
        fmt::format("no weights of order {} for '{}': residual {:.3e}",
                    target_p, t.name, out.residual),
        out.residual, fmt::format("order <= {}", target_p));
  }
  return out;
}

}  // namespace esdirk
