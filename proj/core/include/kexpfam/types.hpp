#pragma once

#include <Eigen/Core>

namespace kexpfam {

using Vec = Eigen::VectorXd;
// Sample matrices are n x d: one observation per row.
using Mat = Eigen::MatrixXd;

}  // namespace kexpfam
