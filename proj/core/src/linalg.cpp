#include "kglab/linalg.hpp"

#include <Eigen/Eigenvalues>

#include "kglab/errors.hpp"

namespace kglab {

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& S) {
  const double trace = S.trace();
  const double unit = 1e-12 * (trace > 0.0 ? trace : 1.0);
  for (int k = 0; k <= 3; ++k) {
    Eigen::MatrixXd M = S;
    if (k > 0) M.diagonal().array() += k * unit;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  throw FactorizationError("covariance matrix is not positive definite after jitter escalation",
                           min_eig);
}

}  // namespace kglab
