#pragma once

#include <optional>
#include <vector>

#include "esdirk/dense_output.hpp"
#include "esdirk/events.hpp"
#include "esdirk/problem.hpp"
#include "esdirk/stage_solver.hpp"
#include "esdirk/tableau.hpp"

namespace esdirk {

struct ControllerParams {
  double safety = 0.9;
  double facmin = 0.2;
  double facmax = 5.0;
  double facmax_after_reject = 1.0;
  // PI gains as multiples of 1/k, k = min(p, p_hat) + 1:
  //   h_new = h * safety * err_n^-(integral + proportional)/k
  //              * err_{n-1}^(proportional/k)
  double integral = 0.3;
  double proportional = 0.4;
};

struct Controls {
  double rtol = 1e-6;
  Vector atol = Vector::Constant(1, 1e-6);  // size 1 or n
  std::optional<double> h_init;
  double h_min = 0.0;  // 0: 1e-14 * max(1, |tf|)
  std::optional<double> h_max;
  long max_steps = 500000;
  ControllerParams controller;
  NewtonOptions newton;
  bool allow_uncertain_estimator = false;
  bool record_steps = true;
  bool record_segments = true;
  EventOptions events;
};

struct StepRecord {
  double t_n = 0.0;
  double h = 0.0;
  Matrix k;  // s x n
  Vector x_next;
  double err_norm = 0.0;
  bool accepted = false;
  bool newton_failed = false;
  int newton_iterations = 0;
  // Fraction of the step kept; below 1 when an event truncated it.
  double theta_end = 1.0;
};

struct SolveStats {
  long steps = 0;  // accepted
  long rejected = 0;
  long newton_failures = 0;
  long rhs_evals = 0;
  long jacobian_evals = 0;
  long factorizations = 0;
  long newton_iterations = 0;
  long fsal_restarts = 0;
  long events = 0;
};

enum class SolveStatus { Success, EventTerminated };

struct SolveResult {
  SolveStatus status = SolveStatus::Success;
  double t = 0.0;
  Vector x;
  std::vector<StepRecord> steps;  // attempted steps, accepted or not
  std::vector<DenseSegment> segments;
  std::vector<EventHit> events;
  SolveStats stats;
};

/// Result of one step attempt. On Newton failure `record.newton_failed`
/// is set and the remaining fields are partial.
struct StepOutcome {
  StepRecord record;
  Vector next_k1;  // FSAL derivative for the following step
};

/// Carries the state of one integration.
class Stepper {
 public:
  Stepper(const ButcherTableau& tableau, const IvpProblem& problem,
          const Controls& controls);

  /// One step of size h from (t, x) with first-stage derivative k1.
  StepOutcome step(double t, const Vector& x, double h, const Vector& k1);

  Vector error_weights(const Vector& x) const;
  double error_norm(const Vector& e, const Vector& x_next) const;
  StageSolver& solver() { return solver_; }

 private:
  const ButcherTableau& tableau_;
  const IvpProblem& problem_;
  Vector atol_;
  double rtol_;
  StageSolver solver_;
};

/// Error-controlled integration over [t0, tf].
///
/// Throws UnsupportedMethodError for tableaus without an embedded method,
/// for ESDIRK45c unless allow_uncertain_estimator is set, and for event
/// problems on methods without an event-safe extension. Throws
/// StepSizeUnderflow and BudgetExceeded on failure.
SolveResult solve(const ButcherTableau& tableau, const IvpProblem& problem,
                  const Controls& controls = {});

struct FixedOptions {
  double rtol = 1e-10;  // Newton scaling only
  double atol = 1e-10;
  NewtonOptions newton;
};

struct FixedResult {
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<double> err_norm;   // scaled embedded estimate per step
  std::vector<Vector> err_vector; // h sum d_j K_j per step (empty if none)
  SolveStats stats;
};

/// n_steps steps of size h, no error control. Throws ConvergenceError with
/// the step index when the stage iteration fails.
FixedResult solve_fixed(const ButcherTableau& tableau,
                        const IvpProblem& problem, double h, long n_steps,
                        const FixedOptions& options = {});

/// Step-size heuristic from two evaluations of the derivative.
double initial_step(const IvpProblem& problem, double t, const Vector& x,
                    const Vector& xdot, int order, double rtol,
                    const Vector& atol, StageSolver& solver);

}  // namespace esdirk
