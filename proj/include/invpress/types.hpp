#pragma once

#include <Eigen/Dense>

#include <vector>

namespace invpress {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A finite control sequence u_0, ..., u_{n-1}; each entry has length m.
using ControlSequence = std::vector<Vector>;

}  // namespace invpress
