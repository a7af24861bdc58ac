#include "esdirk/integrator.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "esdirk/errors.hpp"

namespace esdirk {

namespace {

double rms(const Vector& v, const Vector& w) {
  return std::sqrt((v.array() / w.array()).square().mean());
}

Vector broadcast_atol(const Vector& atol, int n) {
  if (atol.size() == 1) return Vector::Constant(n, atol(0));
  if (atol.size() != n) {
    throw std::invalid_argument(
        fmt::format("atol has {} entries for a state of dimension {}",
                    atol.size(), n));
  }
  return atol;
}

void require_esdirk(const ButcherTableau& t) {
  if (!t.flags.esdirk) {
    throw UnsupportedMethodError(fmt::format(
        "'{}' is not an ESDIRK tableau (explicit first stage, equal diagonal)",
        t.name));
  }
}

void validate_controls(const Controls& c) {
  if (!(c.rtol >= 1e-14))
    throw std::invalid_argument(fmt::format("rtol = {} is below 1e-14", c.rtol));
  if (!(c.atol.array() > 0.0).all())
    throw std::invalid_argument("atol must be positive in every component");
}

void add_counters(SolveStats& stats, const SolverCounters& c) {
  stats.rhs_evals += c.rhs_evals;
  stats.jacobian_evals += c.jacobian_evals;
  stats.factorizations += c.factorizations;
  stats.newton_iterations += c.newton_iterations;
}

}  // namespace

Stepper::Stepper(const ButcherTableau& tableau, const IvpProblem& problem,
                 const Controls& controls)
    : tableau_(tableau),
      problem_(problem),
      atol_(broadcast_atol(controls.atol, problem.dim())),
      rtol_(controls.rtol),
      solver_(problem, controls.newton) {}

Vector Stepper::error_weights(const Vector& x) const {
  return atol_.array() + rtol_ * x.array().abs();
}

double Stepper::error_norm(const Vector& e, const Vector& x_next) const {
  return rms(e, error_weights(x_next));
}

StepOutcome Stepper::step(double t, const Vector& x, double h,
                          const Vector& k1) {
  const int s = tableau_.stages();
  const double gamma = tableau_.gamma;
  StepOutcome out;
  StepRecord& rec = out.record;
  rec.t_n = t;
  rec.h = h;
  rec.k = Matrix::Zero(s, x.size());
  rec.k.row(0) = k1.transpose();

  const Vector w = error_weights(x);
  solver_.prepare(t, x, h, gamma);
  const int target = tableau_.solution_stage.value_or(-1);
  Vector x_stage;
  for (int i = 1; i < s; ++i) {
    const Vector psi =
        x + h * (rec.k.topRows(i).transpose() *
                 tableau_.a.row(i).head(i).transpose());
    const Vector guess = x + (h * tableau_.c(i)) * k1;
    StageResult r = solver_.solve_stage(t + tableau_.c(i) * h, psi, h, gamma,
                                        guess, w);
    rec.newton_iterations += r.report.iterations;
    if (!r.report.converged) {
      rec.newton_failed = true;
      return out;
    }
    rec.k.row(i) = r.k.transpose();
    if (i == target) x_stage = std::move(r.x);
  }

  if (target >= 0) {
    rec.x_next = std::move(x_stage);
    out.next_k1 = rec.k.row(target).transpose();
  } else {
    rec.x_next = x + h * (rec.k.transpose() * tableau_.b);
  }
  if (tableau_.has_embedded()) {
    const Vector e = h * (rec.k.transpose() * tableau_.d);
    rec.err_norm = error_norm(e, rec.x_next);
  }
  return out;
}

double initial_step(const IvpProblem& problem, double t, const Vector& x,
                    const Vector& xdot, int order, double rtol,
                    const Vector& atol, StageSolver& solver) {
  const Vector w = broadcast_atol(atol, problem.dim()).array() +
                   rtol * x.array().abs();
  const double d0 = rms(x, w);
  const double d1 = rms(xdot, w);
  const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  const Vector x1 = x + h0 * xdot;
  double d2;
  if (problem.mass) {
    // Compare right-hand sides; exact for the differential rows when M = I.
    d2 = rms(solver.rhs(t + h0, x1) - solver.rhs(t, x), w) / h0;
  } else {
    d2 = rms(solver.rhs(t + h0, x1) - xdot, w) / h0;
  }
  const double d = std::max(d1, d2);
  const double h1 = d <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                               : std::pow(0.01 / d, 1.0 / order);
  return std::min(100.0 * h0, h1);
}

SolveResult solve(const ButcherTableau& tableau, const IvpProblem& problem,
                  const Controls& controls) {
  problem.validate();
  validate_controls(controls);
  require_esdirk(tableau);
  if (!tableau.has_embedded()) {
    throw UnsupportedMethodError(fmt::format(
        "'{}' has no embedded method; use fixed-step integration", tableau.name));
  }
  if (tableau.flags.embedded_order_uncertain &&
      !controls.allow_uncertain_estimator) {
    throw UnsupportedMethodError(fmt::format(
        "the error estimator of '{}' has uncertain order; adaptive stepping "
        "requires an explicit override",
        tableau.name));
  }

  std::shared_ptr<const ExtensionMatrix> extension;
  if (auto em = default_extension(tableau.name);
      em && em->stages() == tableau.stages())
    extension = std::make_shared<const ExtensionMatrix>(std::move(*em));
  const bool event_safe = extension && tableau.flags.event_safe;
  if (!problem.events.empty() && !event_safe) {
    throw UnsupportedMethodError(fmt::format(
        "'{}' has no event-safe continuous extension; event location is not "
        "available",
        tableau.name));
  }

  const int n = problem.dim();
  const Vector atol = broadcast_atol(controls.atol, n);
  const int k_order = std::min(tableau.order, tableau.embedded_order) + 1;
  const double span = problem.tf - problem.t0;
  const double h_min = controls.h_min > 0.0
                           ? controls.h_min
                           : 1e-14 * std::max(1.0, std::abs(problem.tf));
  const double h_max = controls.h_max.value_or(span);
  const auto& cp = controls.controller;

  Stepper stepper(tableau, problem, controls);
  StageSolver& solver = stepper.solver();

  SolveResult result;
  double t = problem.t0;
  Vector x = problem.x0;
  SolverCounters init_counters;
  Vector k1 = initial_derivative(problem, t, x, 1e-8, &init_counters);

  auto fresh_step = [&]() {
    const double h0 = controls.h_init
                          ? *controls.h_init
                          : initial_step(problem, t, x, k1, k_order,
                                         controls.rtol, atol, solver);
    return std::clamp(h0, h_min, h_max);
  };
  double h = fresh_step();

  bool first = true;          // no error history for the PI controller
  bool after_reject = false;  // facmax = 1 for the next accepted step
  double err_prev = 1.0;
  double restart_t = t;
  bool just_restarted = false;
  long attempts = 0;
  const double t_end_tol = 1e-14 * std::max(1.0, std::abs(problem.tf));

  while (problem.tf - t > t_end_tol) {
    if (++attempts > controls.max_steps) {
      throw BudgetExceeded(
          fmt::format("step budget of {} exhausted at t = {}", controls.max_steps, t),
          t);
    }
    h = std::min(h, h_max);
    bool last = false;
    if (t + 1.01 * h >= problem.tf) {
      h = problem.tf - t;
      last = true;
    }
    if (h < h_min) {
      throw StepSizeUnderflow(
          fmt::format("step size {:.3e} below minimum {:.3e} at t = {}", h, h_min, t),
          t, h, x);
    }

    StepOutcome out = stepper.step(t, x, h, k1);
    solver.note_step();
    StepRecord& rec = out.record;

    if (rec.newton_failed) {
      ++result.stats.newton_failures;
      if (controls.record_steps) result.steps.push_back(std::move(rec));
      solver.invalidate_jacobian();
      h *= 0.5;
      after_reject = true;
      continue;
    }

    const double err = rec.err_norm;
    if (!(err <= 1.0)) {
      ++result.stats.rejected;
      if (controls.record_steps) result.steps.push_back(std::move(rec));
      const double fac = std::isfinite(err)
                             ? cp.safety * std::pow(err, -1.0 / k_order)
                             : cp.facmin;
      h *= std::clamp(fac, cp.facmin, cp.facmax_after_reject);
      after_reject = true;
      continue;
    }

    // Accepted.
    rec.accepted = true;
    ++result.stats.steps;
    if (out.next_k1.size() == 0)
      out.next_k1 = initial_derivative(problem, t + h, rec.x_next, 1e-8, &init_counters);

    DenseSegment seg;
    if (extension) {
      seg.t_n = t;
      seg.h = h;
      seg.x_n = x;
      seg.k = rec.k;
      seg.extension = extension;
      seg.event_safe = event_safe;
    }

    std::vector<EventHit> hits;
    if (!problem.events.empty()) {
      hits = scan_segment(seg, problem.events, controls.events);
      if (just_restarted) {
        // A guard that fired at the restart point may sit a rounding error
        // away from zero; do not report it again.
        const double window =
            100.0 * controls.events.t_tol * std::max(1.0, std::abs(restart_t));
        std::erase_if(hits, [&](const EventHit& e) {
          return e.t_event - restart_t <= window;
        });
      }
    }
    just_restarted = false;

    if (!hits.empty()) {
      const double t_hit = hits.front().t_event;
      const double window =
          controls.events.t_tol * std::max(1.0, std::abs(t_hit));
      std::erase_if(hits, [&](const EventHit& e) {
        return e.t_event > t_hit + window;
      });
      const double theta = hits.front().theta;
      rec.theta_end = theta;
      seg.theta_end = theta;
      result.stats.events += static_cast<long>(hits.size());
      if (controls.record_steps) result.steps.push_back(std::move(rec));
      if (controls.record_segments) result.segments.push_back(seg);

      bool terminal = false;
      t = hits.front().t_event;
      x = hits.front().x_event;
      for (auto& hit : hits) {
        terminal = terminal || hit.terminal;
        result.events.push_back(hit);
      }
      if (terminal) {
        result.status = SolveStatus::EventTerminated;
        break;
      }
      for (const auto& hit : hits) {
        EventHit at = hit;
        at.x_event = x;
        RestartState state =
            restart_after_event(problem, at, problem.events[hit.spec_index]);
        ++init_counters.rhs_evals;
        x = std::move(state.x);
        k1 = std::move(state.k1);
      }
      ++result.stats.fsal_restarts;
      solver.invalidate_jacobian();
      first = true;
      after_reject = false;
      restart_t = t;
      just_restarted = true;
      h = fresh_step();
      continue;
    }

    double fac;
    if (err == 0.0) {
      fac = cp.facmax;
    } else if (first || after_reject) {
      fac = cp.safety * std::pow(err, -1.0 / k_order);
    } else {
      fac = cp.safety *
            std::pow(err, -(cp.integral + cp.proportional) / k_order) *
            std::pow(err_prev, cp.proportional / k_order);
    }
    fac = std::clamp(fac, cp.facmin,
                     after_reject ? cp.facmax_after_reject : cp.facmax);
    err_prev = std::max(err, 1e-4);
    first = false;
    after_reject = false;

    t = last ? problem.tf : t + h;
    x = rec.x_next;
    k1 = std::move(out.next_k1);
    if (controls.record_steps) result.steps.push_back(std::move(rec));
    if (extension && controls.record_segments) result.segments.push_back(std::move(seg));
    h *= fac;
  }

  result.t = t;
  result.x = x;
  add_counters(result.stats, solver.counters());
  add_counters(result.stats, init_counters);
  return result;
}

FixedResult solve_fixed(const ButcherTableau& tableau,
                        const IvpProblem& problem, double h, long n_steps,
                        const FixedOptions& options) {
  problem.validate();
  require_esdirk(tableau);
  if (!(h > 0.0) || n_steps < 1)
    throw std::invalid_argument("fixed-step integration needs h > 0 and n >= 1");

  Controls controls;
  controls.rtol = options.rtol;
  controls.atol = Vector::Constant(1, options.atol);
  controls.newton = options.newton;
  Stepper stepper(tableau, problem, controls);

  FixedResult out;
  SolverCounters init_counters;
  double t = problem.t0;
  Vector x = problem.x0;
  Vector k1 = initial_derivative(problem, t, x, 1e-8, &init_counters);
  out.t.push_back(t);
  out.x.push_back(x);
  for (long i = 0; i < n_steps; ++i) {
    StepOutcome step = stepper.step(t, x, h, k1);
    stepper.solver().note_step();
    if (step.record.newton_failed) {
      throw ConvergenceError(
          fmt::format("stage iteration failed in step {} at t = {} (h = {})", i,
                      t, h),
          i);
    }
    t = problem.t0 + static_cast<double>(i + 1) * h;
    x = step.record.x_next;
    k1 = step.next_k1.size() > 0
             ? step.next_k1
             : initial_derivative(problem, t, x, 1e-8, &init_counters);
    out.t.push_back(t);
    out.x.push_back(x);
    if (tableau.has_embedded()) {
      out.err_norm.push_back(step.record.err_norm);
      out.err_vector.push_back(h * (step.record.k.transpose() * tableau.d));
    }
    ++out.stats.steps;
  }
  add_counters(out.stats, stepper.solver().counters());
  add_counters(out.stats, init_counters);
  return out;
}

}  // namespace esdirk
