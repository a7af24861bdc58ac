#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "esdirk/tableau.hpp"

namespace esdirk {

enum class SideKind { EndpointB, EndpointBhat, StageMatch, DerivativeMatch };

/// Extra interpolation condition. `stage` is 1-based and only used by
/// StageMatch (x_bar(t_n + c_i h) = X_i) and DerivativeMatch
/// (d/dt x_bar(t_n + c_i h) = Xdot_i).
struct SideCondition {
  SideKind kind = SideKind::EndpointB;
  int stage = 0;

  static SideCondition endpoint_b() { return {SideKind::EndpointB, 0}; }
  static SideCondition endpoint_bhat() { return {SideKind::EndpointBhat, 0}; }
  static SideCondition stage_match(int i) { return {SideKind::StageMatch, i}; }
  static SideCondition derivative_match(int i) {
    return {SideKind::DerivativeMatch, i};
  }

  std::string label() const;
  bool operator==(const SideCondition&) const = default;
};

enum class SolutionMode { Unique, MinNorm, MinNormWithDerivative, Stored };

std::string_view to_string(SolutionMode mode);

/// Continuous extension b_bar(theta) = sum_k b_bar.col(k-1) theta^k.
struct ExtensionMatrix {
  std::string method;
  std::string variant;
  Matrix b_bar;  // s x q
  int order = 0;
  std::vector<SideCondition> side_conditions;
  SolutionMode mode = SolutionMode::Stored;
  // For stored matrices: how solve_extension is expected to reproduce it,
  // or empty when it cannot be re-derived (minimum-curvature variant).
  std::optional<SolutionMode> derivation;
  int rank = 0;
  int unknowns = 0;
  double residual = 0.0;

  int stages() const { return static_cast<int>(b_bar.rows()); }
};

inline constexpr int kMaxExtensionOrder = 4;
inline constexpr double kExtensionInfeasibility = 1e-9;
inline constexpr double kExtensionCheckTolerance = 1e-10;

/// Rows e', (Ce)', (C^2e)', (ACe)', (C^3e)', (CACe)', (AC^2e)', (A^2Ce)'.
Matrix psi_bar(const ButcherTableau& t);

/// Solves the stacked system for vec(B_bar): order conditions of order <= q
/// (tree tau constrains column r(tau) with 1/gamma(tau), the other columns
/// with 0) plus one block of s rows per side condition. The minimum-norm
/// solution is returned when the system is under-determined. Throws
/// InfeasibleError when the residual relative to the right-hand side
/// exceeds 1e-9, naming the block with the largest residual.
ExtensionMatrix solve_extension(const ButcherTableau& t, int q,
                                const std::vector<SideCondition>& conds);

/// b_bar(theta) and its theta-derivative.
Vector extension_weights(const ExtensionMatrix& em, double theta);
Vector extension_weights_derivative(const ExtensionMatrix& em, double theta);

/// x_n + h K' b_bar(theta) with K holding one stage derivative per row.
/// Throws OutOfRangeError for theta outside [0, 1].
Vector eval_extension(const ExtensionMatrix& em, const Vector& x_n, double h,
                      const Matrix& k, double theta);

/// Stored coefficient matrices. Throws NotFoundError listing the catalog.
ExtensionMatrix builtin_extension(std::string_view method,
                                  std::string_view variant);

const std::vector<std::pair<std::string, std::string>>& extension_catalog();

/// The extension used for dense output and event location, if the method
/// has one.
std::optional<ExtensionMatrix> default_extension(std::string_view method);

struct InfeasibleCase {
  int order;
  std::vector<SideCondition> conditions;
};

/// Combinations for which no continuous extension exists according to the
/// method's derivation; solve_extension must reject each of them.
std::vector<InfeasibleCase> known_infeasible_extensions(std::string_view method);

/// Everything needed to interpolate inside one accepted step.
struct DenseSegment {
  double t_n = 0.0;
  double h = 0.0;
  Vector x_n;
  Matrix k;
  std::shared_ptr<const ExtensionMatrix> extension;
  bool event_safe = false;
  double theta_end = 1.0;

  double t_end() const { return t_n + theta_end * h; }
  Vector eval(double theta) const;
  Vector eval_at(double t) const;
};

struct ExtensionCheck {
  double order_residual = 0.0;  // max |Psi_bar B_bar - Gamma_bar|
  double side_residual = 0.0;   // max residual over side conditions
  bool passed = false;
};

/// Checks the order-condition block and every recorded side condition.
ExtensionCheck check_extension(const ButcherTableau& t,
                               const ExtensionMatrix& em,
                               double tol = kExtensionCheckTolerance);

}  // namespace esdirk
