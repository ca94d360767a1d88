#pragma once

#include <Eigen/Dense>

namespace expmart {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace expmart
