#include "esdirk/problem.hpp"

#include <stdexcept>

#include <Eigen/LU>
#include <fmt/format.h>

namespace esdirk {

namespace {

std::vector<int> zero_lines(const Matrix& m, bool rows) {
  std::vector<int> out;
  const auto n = rows ? m.rows() : m.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool zero = rows ? m.row(i).isZero(0.0) : m.col(i).isZero(0.0);
    if (zero) out.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace

bool IvpProblem::is_dae() const {
  return mass && !algebraic_equations().empty();
}

std::vector<int> IvpProblem::algebraic_equations() const {
  return mass ? zero_lines(*mass, true) : std::vector<int>{};
}

std::vector<int> IvpProblem::algebraic_variables() const {
  return mass ? zero_lines(*mass, false) : std::vector<int>{};
}

std::vector<int> IvpProblem::differential_variables() const {
  std::vector<int> alg = algebraic_variables(), out;
  for (int i = 0, k = 0; i < dim(); ++i) {
    if (k < static_cast<int>(alg.size()) && alg[k] == i)
      ++k;
    else
      out.push_back(i);
  }
  return out;
}

void IvpProblem::validate() const {
  const auto fail = [this](const std::string& msg) {
    throw std::invalid_argument(fmt::format("problem '{}': {}", name, msg));
  };
  if (!rhs) fail("no right-hand side");
  if (x0.size() == 0) fail("empty initial state");
  if (!(t0 < tf)) fail(fmt::format("t0 = {} must be less than tf = {}", t0, tf));
  if (!mass) return;
  if (mass->rows() != x0.size() || mass->cols() != x0.size())
    fail("mass matrix dimensions do not match the state");
  const auto eqs = algebraic_equations();
  const auto vars = algebraic_variables();
  if (eqs.size() != vars.size())
    fail("singular mass matrix is not in semi-explicit form");
  const auto diff = differential_variables();
  std::vector<int> diff_rows;
  for (int i = 0, k = 0; i < dim(); ++i) {
    if (k < static_cast<int>(eqs.size()) && eqs[k] == i)
      ++k;
    else
      diff_rows.push_back(i);
  }
  Matrix block(diff_rows.size(), diff.size());
  for (std::size_t i = 0; i < diff_rows.size(); ++i)
    for (std::size_t j = 0; j < diff.size(); ++j)
      block(i, j) = (*mass)(diff_rows[i], diff[j]);
  if (!diff.empty() && Eigen::FullPivLU<Matrix>(block).rank() < block.rows())
    fail("the differential block of the mass matrix is singular");
}

}  // namespace esdirk
