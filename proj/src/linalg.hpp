#pragma once

#include <Eigen/QR>

#include "esdirk/types.hpp"

namespace esdirk::detail {

struct MinNormSolution {
  Vector x;
  int rank = 0;
};

// Minimum 2-norm least-squares solution. Pivots below rel_threshold times
// the largest pivot count as zero.
inline MinNormSolution min_norm_solve(const Matrix& m, const Vector& rhs,
                                      double rel_threshold) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m.rows(), m.cols());
  cod.setThreshold(rel_threshold);
  cod.compute(m);
  return {cod.solve(rhs), static_cast<int>(cod.rank())};
}

}  // namespace esdirk::detail
