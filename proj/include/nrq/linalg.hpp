#pragma once

#include <Eigen/Dense>

namespace nrq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace nrq
