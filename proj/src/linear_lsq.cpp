#include "combfit/linear_lsq.hpp"

#include <string>

#include "combfit/errors.hpp"

namespace combfit::numeric {

LinearFit weighted_linear_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& data,
                              const Eigen::VectorXd& sigma, double rank_tolerance) {
  const Eigen::Index rows = design.rows();
  const Eigen::Index cols = design.cols();
  if (data.size() != rows || sigma.size() != rows) {
    throw domain_error("weighted_linear_fit: size mismatch");
  }
  if (rows < cols) {
    throw domain_error("weighted_linear_fit: " + std::to_string(rows) + " points for " + std::to_string(cols) +
                       " parameters");
  }
  if ((sigma.array() <= 0.0).any() || !sigma.allFinite()) {
    throw domain_error("weighted_linear_fit: sigma must be positive and finite");
  }
  const Eigen::VectorXd w = sigma.cwiseInverse();
  Eigen::MatrixXd a = w.asDiagonal() * design;
  const Eigen::VectorXd b = w.asDiagonal() * data;
  // Column equilibration so the rank test is independent of parameter units.
  Eigen::VectorXd scale(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double norm = a.col(j).norm();
    if (!(norm > 0.0)) {
      throw domain_error("weighted_linear_fit: design column " + std::to_string(j) + " is zero");
    }
    scale(j) = 1.0 / norm;
    a.col(j) *= scale(j);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(rank_tolerance);
  if (qr.rank() < cols) {
    throw domain_error("weighted_linear_fit: design matrix is rank deficient");
  }
  LinearFit fit;
  fit.params = scale.asDiagonal() * qr.solve(b);
  // (A^T A)^-1 = P R^-1 R^-T P^T, then undo the column scaling.
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(cols, cols));
  const Eigen::MatrixXd cov_perm = r_inv * r_inv.transpose();
  const Eigen::MatrixXd cov_scaled = qr.colsPermutation() * cov_perm * qr.colsPermutation().transpose();
  fit.covariance = scale.asDiagonal() * cov_scaled * scale.asDiagonal();
  fit.residuals = data - design * fit.params;
  fit.chi2 = (fit.residuals.cwiseProduct(w)).squaredNorm();
  fit.dof = static_cast<std::size_t>(rows - cols);
  return fit;
}

}  // namespace combfit::numeric
