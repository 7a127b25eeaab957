#pragma once

#include <Eigen/Dense>

namespace kmf {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Symmetric PSD square root via eigendecomposition; negative eigenvalues
/// are clipped at zero before taking the root.
Mat symmetric_psd_sqrt(const Mat& s);

/// Factor L with L*L^T = s for a symmetric PSD matrix. Uses Cholesky when
/// the matrix is numerically PD and falls back to an eigenvalue factor
/// otherwise (covers exactly-singular covariances such as Q = 0).
Mat psd_factor(const Mat& s);

bool is_finite(const Mat& m);

}  // namespace kmf
