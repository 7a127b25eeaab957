#pragma once

#include "kmf/kernels.hpp"
#include "kmf/types.hpp"

namespace kmf {

/// Weighted sample representing a distribution: one state point per column
/// and a probability weight per point. All kernel-embedding computations in
/// this library stay in these weight coordinates; feature maps are never
/// materialized.
struct WeightedSample {
  Mat points;     // n_x x m, one column per point
  Vec weights;    // m, sums to one
  double floor = 0.0;  // lower bound kept on posterior weights

  int count() const { return static_cast<int>(points.cols()); }
  int dim() const { return static_cast<int>(points.rows()); }

  /// Checks the weight-vector invariants; enforce_floor additionally checks
  /// the per-weight lower bound (posterior samples only).
  void validate(bool enforce_floor = false) const;
};

/// Centered weight matrix diag(w) - w*w^T and its symmetric PSD square root.
struct CenteredWeight {
  Mat full;
  Mat half;
};

CenteredWeight centered_weight(const Vec& weights);

/// Noiseless measurement sample: column l holds the measurement function
/// evaluated at sample point l, plus the sensor noise covariance.
struct MeasurementSample {
  Mat values;     // n_y x m
  Mat noise_cov;  // n_y x n_y, SPD
};

/// Regression coefficients of the measurement operator over the sample
/// points: B = (K + sigma_reg*I)^{-1} Y^T. The fit is independent of the
/// sample weights.
Mat fit_measurement_operator(const GramContext& gram, const MeasurementSample& meas);

/// Predicted measurement mean B^T K w. Equals Y*w exactly when the Gram
/// regularizer is zero.
Vec predicted_measurement_mean(const GramContext& gram, const Mat& coeffs, const Vec& weights);

}  // namespace kmf
