#pragma once

#include <Eigen/Dense>

namespace kmp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace kmp
