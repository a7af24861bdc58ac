#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "esdirk/types.hpp"

namespace esdirk {

using RhsFn = std::function<Vector(double, const Vector&)>;
using JacobianFn = std::function<Matrix(double, const Vector&)>;
using GuardFn = std::function<double(double, const Vector&)>;
using ResetFn = std::function<Vector(double, const Vector&)>;

enum class Direction { Any, Up, Down };

struct EventSpec {
  GuardFn guard;
  Direction direction = Direction::Any;
  bool terminal = false;
  ResetFn action;  // empty: state is left unchanged
  std::string name;
};

/// M x' = f(t, x) on [t0, tf].
///
/// Without a mass matrix M is the identity. A singular M must be in
/// semi-explicit form: the zero rows of M are the algebraic equations
/// 0 = g(t, x) and the zero columns are the algebraic variables. The
/// remaining block must be nonsingular.
struct IvpProblem {
  std::string name;
  RhsFn rhs;
  JacobianFn jacobian;  // empty: forward differences
  std::optional<Matrix> mass;
  Vector x0;
  double t0 = 0.0;
  double tf = 1.0;
  std::vector<EventSpec> events;

  int dim() const { return static_cast<int>(x0.size()); }
  bool is_dae() const;
  /// Indices of zero rows of M (algebraic equations).
  std::vector<int> algebraic_equations() const;
  /// Indices of zero columns of M (algebraic variables).
  std::vector<int> algebraic_variables() const;
  std::vector<int> differential_variables() const;

  /// Throws std::invalid_argument on inconsistent dimensions, t0 >= tf, a
  /// missing rhs, or a singular mass matrix that is not semi-explicit.
  void validate() const;
};

}  // namespace esdirk
