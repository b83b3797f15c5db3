#pragma once

#include <Eigen/Dense>

namespace semidr {

using Vector = Eigen::VectorXd;
/// Column-major; sample matrices hold one observation per row.
using Matrix = Eigen::MatrixXd;

}  // namespace semidr
