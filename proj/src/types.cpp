#include "kmf/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace kmf {

Mat symmetric_psd_sqrt(const Mat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(s);
  Vec vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

Mat psd_factor(const Mat& s) {
  Eigen::LLT<Mat> llt(s);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Mat> eig(s);
  Vec vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * vals.asDiagonal();
}

bool is_finite(const Mat& m) { return m.allFinite(); }

}  // namespace kmf
