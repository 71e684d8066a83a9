#pragma once

#include <Eigen/Dense>

namespace graphdiff {

/// Matrix exponential by Pade scaling and squaring (degrees 3..13 chosen from
/// the 1-norm, as in Higham's 2005 algorithm).
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

}  // namespace graphdiff
