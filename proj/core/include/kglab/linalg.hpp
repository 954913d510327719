#pragma once

#include <Eigen/Dense>

namespace kglab {

// Lower-triangular factor L with L L^T = S (+ jitter I if needed). Jitter is
// escalated k * 1e-12 * trace for k = 0..3; if the matrix still fails to
// factor, throws FactorizationError carrying the smallest eigenvalue.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& S);

}  // namespace kglab
