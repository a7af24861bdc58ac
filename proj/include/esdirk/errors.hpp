#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "esdirk/types.hpp"

namespace esdirk {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOrderError : public Error {
 public:
  using Error::Error;
};

class DegenerateTableauError : public Error {
 public:
  using Error::Error;
};

class UnsupportedMethodError : public Error {
 public:
  using Error::Error;
};

class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// A linear system of order/side conditions has no solution. `block` names
/// the condition group with the largest residual.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double residual, std::string block)
      : Error(what), residual_(residual), block_(std::move(block)) {}
  double residual() const noexcept { return residual_; }
  const std::string& block() const noexcept { return block_; }

 private:
  double residual_;
  std::string block_;
};

class InconsistentInitialConditions : public Error {
 public:
  using Error::Error;
};

class NotIndexOneError : public Error {
 public:
  using Error::Error;
};

/// Newton iteration failed at a fixed step size (no controller to fall back on).
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, long step_index)
      : Error(what), step_index_(step_index) {}
  long step_index() const noexcept { return step_index_; }

 private:
  long step_index_;
};

class StepSizeUnderflow : public Error {
 public:
  StepSizeUnderflow(const std::string& what, double t, double h, Vector x)
      : Error(what), t_(t), h_(h), x_(std::move(x)) {}
  double t() const noexcept { return t_; }
  double h() const noexcept { return h_; }
  const Vector& state() const noexcept { return x_; }

 private:
  double t_;
  double h_;
  Vector x_;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, double t)
      : Error(what), t_(t) {}
  double t() const noexcept { return t_; }

 private:
  double t_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace esdirk
