#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace combfit::numeric {

struct LinearFit {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // (A^T W A)^-1, not rescaled by chi2
  Eigen::VectorXd residuals;   // data - model, in data units
  double chi2 = 0.0;
  std::size_t dof = 0;
};

// Weighted linear least squares, model = design * params, weights 1/sigma^2.
// Solved by column-pivoting QR on the whitened system. Throws domain_error
// when the design is rank deficient at relative threshold `rank_tolerance`.
LinearFit weighted_linear_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& data,
                              const Eigen::VectorXd& sigma, double rank_tolerance = 1e-12);

}  // namespace combfit::numeric
