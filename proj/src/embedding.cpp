#include "kmf/embedding.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "kmf/errors.hpp"

namespace kmf {

void WeightedSample::validate(bool enforce_floor) const {
  if (count() < 2) throw ArgumentError("WeightedSample: need at least two points");
  if (weights.size() != count()) {
    throw ArgumentError("WeightedSample: weight count does not match point count");
  }
  const double sum = weights.sum();
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "WeightedSample: weights sum to " << sum << ", expected 1";
    throw ArgumentError(os.str());
  }
  if (enforce_floor && weights.minCoeff() < floor - 1e-12) {
    throw ArgumentError("WeightedSample: weight below configured floor");
  }
}

CenteredWeight centered_weight(const Vec& weights) {
  const double sum = weights.sum();
  if (std::abs(sum - 1.0) > 1e-12 || weights.minCoeff() < -1e-12) {
    throw ArgumentError("centered_weight: input is not a probability vector");
  }
  CenteredWeight cw;
  cw.full = Mat(weights.asDiagonal()) - weights * weights.transpose();
  cw.half = symmetric_psd_sqrt(cw.full);
  return cw;
}

Mat fit_measurement_operator(const GramContext& gram, const MeasurementSample& meas) {
  if (meas.values.cols() != gram.size()) {
    throw ArgumentError("fit_measurement_operator: sample sizes differ");
  }
  return gram.solve(Mat(meas.values.transpose()));
}

Vec predicted_measurement_mean(const GramContext& gram, const Mat& coeffs, const Vec& weights) {
  if (coeffs.rows() != gram.size() || weights.size() != gram.size()) {
    throw ArgumentError("predicted_measurement_mean: inconsistent shapes");
  }
  return coeffs.transpose() * (gram.kernel_matrix() * weights);
}

}  // namespace kmf
