#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "esdirk/types.hpp"

namespace esdirk {

struct TableauFlags {
  bool esdirk = false;
  bool stiffly_accurate = false;
  bool fsal = false;
  // All abscissae lie in [0, 1], so every stage time is inside the step.
  bool event_safe = false;
  bool embedded_order_uncertain = false;
};

/// Butcher tableau of an (E)SDIRK method with an optional embedded method.
///
/// `d` holds the error weights b - b_hat and is empty when there is no
/// embedded method. `solution_stage` is the zero-based index of the stage
/// whose value is the advancing solution (the row of A equal to b with
/// c = 1); it is set exactly when the method is stiffly accurate. For most
/// methods this is the last stage, but Kvaerno-type tableaus may carry an
/// extra stage after it that only feeds the embedded method.
struct ButcherTableau {
  std::string name;
  Matrix a;
  Vector b;
  std::optional<Vector> b_hat;
  Vector d;
  Vector c;
  double gamma = 0.0;
  int order = 0;
  int embedded_order = 0;
  TableauFlags flags;
  std::optional<int> solution_stage;

  int stages() const { return static_cast<int>(c.size()); }
  bool has_embedded() const { return b_hat.has_value(); }
};

/// Assembles a tableau and derives d, gamma, solution_stage and the
/// structural flags. Throws std::invalid_argument on dimension mismatch.
ButcherTableau make_tableau(std::string name, Matrix a, Vector b,
                            std::optional<Vector> b_hat, Vector c, int order,
                            int embedded_order);

/// Builtin method by name (ESDIRK12, ESDIRK23, ESDIRK34, ESDIRK32a,
/// ESDIRK32b, ESDIRK43b, ESDIRK32c, ESDIRK45c). Throws NotFoundError.
ButcherTableau builtin(std::string_view name);

const std::vector<std::string>& builtin_names();

/// The tableau restricted to its first `stages` stages, with b taken from
/// row `stages - 1` of A and no embedded method.
ButcherTableau leading_subtableau(const ButcherTableau& t, int stages);

struct CheckReport {
  std::string check;
  bool passed = false;
  double residual = 0.0;
  std::string detail;
};

inline constexpr double kConsistencyTolerance = 1e-13;
inline constexpr double kStageOrderTolerance = 1e-13;

/// Row-sum condition sum_j a_ij = c_i.
CheckReport check_consistency(const ButcherTableau& t);

/// Stage order 2 on the interior stages 2..s-1: sum_j a_ij c_j = c_i^2 / 2,
/// plus c_2 = 2 gamma when there is an interior stage.
CheckReport check_stage_order_2(const ButcherTableau& t);

}  // namespace esdirk
