#pragma once

#include <Eigen/Dense>

namespace esdirk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace esdirk
