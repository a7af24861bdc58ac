#pragma once

#include <optional>

#include <Eigen/LU>

#include "esdirk/problem.hpp"

namespace esdirk {

struct NewtonOptions {
  double kappa = 0.03;
  int max_iterations = 10;
  // Refactor M - h gamma J when h drifts this far from the factored step.
  double refactor_ratio = 0.2;
  // Refresh J and refactor after this many steps on the same Jacobian.
  int max_age = 50;
  // Mark J stale when a converged solve had a slower contraction rate.
  double jacobian_refresh_rate = 0.5;
  // Forward-difference increment sqrt(eps) * max(|x_j|, fd_scale).
  double fd_scale = 1e-5;
  // Refactor before every stage solve (testing aid).
  bool force_refactor = false;
};

struct NewtonReport {
  int iterations = 0;
  bool converged = false;
  double rate = 0.0;
  double final_norm = 0.0;  // scaled norm of the last displacement
};

/// Factored M - h gamma J together with the data it was formed from.
struct IterationMatrix {
  Eigen::PartialPivLU<Matrix> lu;
  Matrix jacobian;
  double h = 0.0;
  double t = 0.0;
  double gamma = 0.0;
  int age = 0;  // steps since the Jacobian was evaluated
  bool factored = false;
  bool jacobian_current = false;
};

struct StageResult {
  Vector x;  // X_i
  Vector k;  // (X_i - psi) / (h gamma)
  NewtonReport report;
};

struct SolverCounters {
  long rhs_evals = 0;
  long jacobian_evals = 0;
  long factorizations = 0;
  long newton_iterations = 0;
};

/// Forward-difference Jacobian of f at (t, x).
Matrix finite_difference_jacobian(const RhsFn& f, double t, const Vector& x,
                                  const Vector& fx, double scale = 1e-5);

/// Modified Newton solver for the implicit stages
///   M (X - psi) - h gamma f(t_i, X) = 0
/// with the iteration matrix reused across stages and steps.
class StageSolver {
 public:
  StageSolver(const IvpProblem& problem, NewtonOptions options = {});

  /// Ensures a factored iteration matrix usable for step size h, refreshing
  /// J and refactoring according to the reuse rules.
  void prepare(double t, const Vector& x, double h, double gamma);

  /// Solves one stage starting from `guess`. `weights` are the error
  /// weights atol_i + rtol |x_n,i| used for the scaled RMS norm.
  StageResult solve_stage(double t_i, const Vector& psi, double h,
                          double gamma, const Vector& guess,
                          const Vector& weights);

  /// Called once per completed step attempt to age the Jacobian.
  void note_step() { ++itmat_.age; }
  /// Forces a fresh Jacobian and factorization at the next prepare().
  void invalidate_jacobian() { itmat_.jacobian_current = false; }

  Vector rhs(double t, const Vector& x);
  Matrix jacobian(double t, const Vector& x);

  const IterationMatrix& iteration_matrix() const { return itmat_; }
  const SolverCounters& counters() const { return counters_; }
  const NewtonOptions& options() const { return options_; }

 private:
  void factor(double h, double gamma);

  const IvpProblem& problem_;
  NewtonOptions options_;
  Matrix mass_;
  IterationMatrix itmat_;
  SolverCounters counters_;
  double eta_ = 1.0;  // contraction memory carried between solves
};

/// Stage derivative at the initial point. For an ODE this is M^{-1} f; for
/// a semi-explicit index-1 DAE the algebraic derivatives solve
///   g_t + g_x xdot + g_y ydot = 0.
/// Throws InconsistentInitialConditions when |g| exceeds `consistency_tol`
/// and NotIndexOneError when g_y is singular.
Vector initial_derivative(const IvpProblem& problem, double t, const Vector& x,
                          double consistency_tol = 1e-8,
                          SolverCounters* counters = nullptr);

}  // namespace esdirk
