#include "esdirk/stage_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "esdirk/errors.hpp"

namespace esdirk {

namespace {

constexpr double kUround = std::numeric_limits<double>::epsilon();

double scaled_rms(const Vector& v, const Vector& weights) {
  return std::sqrt((v.array() / weights.array()).square().mean());
}

Matrix select(const Matrix& m, const std::vector<int>& rows,
              const std::vector<int>& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

Vector select(const Vector& v, const std::vector<int>& idx) {
  Vector out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

std::vector<int> complement(const std::vector<int>& idx, int n) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (!std::binary_search(idx.begin(), idx.end(), i)) out.push_back(i);
  return out;
}

}  // namespace

Matrix finite_difference_jacobian(const RhsFn& f, double t, const Vector& x,
                                  const Vector& fx, double scale) {
  const auto n = x.size();
  Matrix j(fx.size(), n);
  Vector xp = x;
  const double root_eps = std::sqrt(kUround);
  for (Eigen::Index c = 0; c < n; ++c) {
    const double delta = root_eps * std::max(std::abs(x(c)), scale);
    xp(c) = x(c) + delta;
    j.col(c) = (f(t, xp) - fx) / (xp(c) - x(c));
    xp(c) = x(c);
  }
  return j;
}

StageSolver::StageSolver(const IvpProblem& problem, NewtonOptions options)
    : problem_(problem), options_(options) {
  const auto n = problem.dim();
  mass_ = problem.mass ? *problem.mass : Matrix(Matrix::Identity(n, n));
}

Vector StageSolver::rhs(double t, const Vector& x) {
  ++counters_.rhs_evals;
  return problem_.rhs(t, x);
}

Matrix StageSolver::jacobian(double t, const Vector& x) {
  ++counters_.jacobian_evals;
  if (problem_.jacobian) return problem_.jacobian(t, x);
  const Vector fx = rhs(t, x);
  counters_.rhs_evals += x.size();
  return finite_difference_jacobian(problem_.rhs, t, x, fx, options_.fd_scale);
}

void StageSolver::factor(double h, double gamma) {
  itmat_.lu.compute(mass_ - (h * gamma) * itmat_.jacobian);
  itmat_.h = h;
  itmat_.gamma = gamma;
  itmat_.factored = true;
  ++counters_.factorizations;
}

void StageSolver::prepare(double t, const Vector& x, double h, double gamma) {
  const bool refresh =
      !itmat_.jacobian_current || itmat_.age >= options_.max_age;
  if (refresh) {
    itmat_.jacobian = jacobian(t, x);
    itmat_.jacobian_current = true;
    itmat_.t = t;
    itmat_.age = 0;
  }
  const bool drifted =
      itmat_.factored &&
      std::abs(h - itmat_.h) > options_.refactor_ratio * std::abs(itmat_.h);
  if (refresh || !itmat_.factored || drifted || gamma != itmat_.gamma ||
      options_.force_refactor) {
    factor(h, gamma);
  }
}

StageResult StageSolver::solve_stage(double t_i, const Vector& psi, double h,
                                     double gamma, const Vector& guess,
                                     const Vector& weights) {
  if (options_.force_refactor) factor(h, gamma);
  StageResult out{guess, Vector(), {}};
  Vector& x = out.x;
  NewtonReport& rep = out.report;

  double eta = std::pow(std::max(eta_, kUround), 0.8);
  double previous = 0.0;
  for (int it = 1; it <= options_.max_iterations; ++it) {
    const Vector residual = mass_ * (x - psi) - (h * gamma) * rhs(t_i, x);
    const Vector dx = itmat_.lu.solve(-residual);
    x += dx;
    ++counters_.newton_iterations;
    rep.iterations = it;
    const double norm = scaled_rms(dx, weights);
    rep.final_norm = norm;
    if (!std::isfinite(norm)) break;
    if (it > 1) {
      rep.rate = std::clamp(norm / previous, 0.0, 2.0);
      if (rep.rate >= 1.0) break;
      eta = rep.rate / (1.0 - rep.rate);
    }
    if (norm == 0.0 || eta * norm <= options_.kappa) {
      rep.converged = true;
      break;
    }
    previous = norm;
  }

  if (!rep.converged) {
    eta_ = 1.0;
    return out;
  }
  eta_ = eta;
  if (rep.rate > options_.jacobian_refresh_rate) itmat_.jacobian_current = false;
  out.k = (x - psi) / (h * gamma);
  return out;
}

Vector initial_derivative(const IvpProblem& problem, double t, const Vector& x,
                          double consistency_tol, SolverCounters* counters) {
  auto count_rhs = [&](long n) {
    if (counters) counters->rhs_evals += n;
  };
  const Vector f = problem.rhs(t, x);
  count_rhs(1);
  if (!problem.mass) return f;
  if (!problem.is_dae()) return problem.mass->partialPivLu().solve(f);

  const int n = problem.dim();
  const auto eqs = problem.algebraic_equations();
  const auto alg = problem.algebraic_variables();
  const auto diff_rows = complement(eqs, n);
  const auto diff = problem.differential_variables();

  const Vector g = select(f, eqs);
  const double g_norm = g.cwiseAbs().maxCoeff();
  if (!(g_norm <= consistency_tol)) {
    throw InconsistentInitialConditions(fmt::format(
        "problem '{}': algebraic residual {:.3e} at t = {} exceeds {:.1e}",
        problem.name, g_norm, t, consistency_tol));
  }

  Matrix jac;
  if (problem.jacobian) {
    jac = problem.jacobian(t, x);
  } else {
    jac = finite_difference_jacobian(problem.rhs, t, x, f);
    count_rhs(n);
  }
  if (counters) ++counters->jacobian_evals;

  const Matrix m_dd = select(*problem.mass, diff_rows, diff);
  const Vector xdot_d = m_dd.partialPivLu().solve(select(f, diff_rows));

  const double dt = std::sqrt(kUround) * std::max(1.0, std::abs(t));
  const Vector g_t = (select(problem.rhs(t + dt, x), eqs) - g) / dt;
  count_rhs(1);

  const Matrix g_y = select(jac, eqs, alg);
  const Matrix g_x = select(jac, eqs, diff);
  Eigen::FullPivLU<Matrix> lu(g_y);
  if (lu.rank() < g_y.rows()) {
    throw NotIndexOneError(fmt::format(
        "problem '{}': the algebraic Jacobian g_y is singular at t = {}",
        problem.name, t));
  }
  const Vector ydot = lu.solve(-(g_t + g_x * xdot_d));

  Vector out(n);
  for (std::size_t i = 0; i < diff.size(); ++i) out(diff[i]) = xdot_d(i);
  for (std::size_t i = 0; i < alg.size(); ++i) out(alg[i]) = ydot(i);
  return out;
}

}  // namespace esdirk
