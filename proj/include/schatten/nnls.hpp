#pragma once

#include <Eigen/Dense>

namespace schatten {

// Nonnegative least squares: minimize |e x - f|_2 subject to x >= 0,
// by the active-set method of Lawson and Hanson.
Eigen::VectorXd nnls(const Eigen::MatrixXd& e, const Eigen::VectorXd& f);

}  // namespace schatten
