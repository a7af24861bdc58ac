#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "esdirk/problem.hpp"

namespace esdirk {

enum class ReferenceKind { Analytic, Numerical };

struct TestProblem {
  IvpProblem problem;
  ReferenceKind reference = ReferenceKind::Numerical;
  // Closed-form solution and its derivative; empty for numerical references.
  std::function<Vector(double)> exact;
  std::function<Vector(double)> exact_derivative;
  bool stiff = false;
  std::string notes;
};

/// Names accepted by make_problem, in corpus order.
const std::vector<std::string>& problem_names();

/// Throws NotFoundError listing the valid names.
TestProblem make_problem(std::string_view name);

std::vector<TestProblem> corpus();

/// Impact times of the bouncing ball problem (drop from height h0 under
/// gravity g, rebound speed factor e).
std::vector<double> bounce_times(int count, double h0 = 1.0, double g = 9.81,
                                 double e = 0.9);

/// Settings used for numerical reference solutions.
inline constexpr double kReferenceTolerance = 1e-11;
inline constexpr const char* kReferenceMethod = "ESDIRK34";

}  // namespace esdirk
