#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kmf/dnf.hpp"
#include "kmf/embedding.hpp"

namespace kmf {

/// Measurements of all sensors stacked in node order with block-diagonal
/// noise covariance.
struct AugmentedMeasurement {
  Vec measurement;  // n_y
  Mat values;       // n_y x m, stacked noiseless measurement sample
  Mat noise_cov;    // n_y x n_y block diagonal
  std::vector<int> block_dims;
};

AugmentedMeasurement augment(const std::vector<Vec>& measurements,
                             const std::vector<MeasurementSample>& samples);

/// Centralized posterior weights computed in measurement space:
///   nu = w + W Y^T (Y W Y^T + R)^{-1} (y - y_hat)
/// with y_hat the regularized predicted measurement mean of the stacked
/// sample. The solve has the size of the stacked measurement, which is
/// normally far smaller than the sample count.
Vec centralized_posterior_weights(const Vec& weights, const CenteredWeight& centered,
                                  const AugmentedMeasurement& aug, const GramContext& gram);

/// Same update computed through the sample-space information form
///   nu = w + Wh (Wh Y^T R^{-1} Y Wh + I)^{-1} Wh Y^T R^{-1} (y - y_hat);
/// equal to the measurement-space form by the Woodbury identity. Kept as an
/// independent route for verification.
Vec centralized_posterior_weights_info_form(const Vec& weights,
                                            const CenteredWeight& centered,
                                            const AugmentedMeasurement& aug,
                                            const GramContext& gram);

/// Raw gain update given an innovation, shared by both public forms.
Vec measurement_space_update(const Vec& weights, const Mat& centered_full,
                             const Mat& meas_values, const Mat& noise_cov,
                             const Vec& innovation);

/// One textbook Kalman predict-plus-update step; the covariance update uses
/// the Joseph form.
std::pair<Vec, Mat> kalman_step(const Vec& mean, const Mat& cov, const Mat& f,
                                const Mat& q, const Mat& h, const Mat& r, const Vec& y);

/// Measurement update only.
std::pair<Vec, Mat> kalman_measurement_update(const Vec& mean, const Mat& cov,
                                              const Mat& h, const Mat& r, const Vec& y);

/// Linear-measurement update computed two ways: through the weight-space
/// filter algebra with the feature map taken as the identity, and through
/// the Kalman measurement update applied to the sample mean and covariance.
/// The two means agree for any sample; both are returned.
struct IdentityEmbeddingUpdate {
  Vec weight_space_mean;
  Vec moment_space_mean;
  Vec posterior_weights;
};
IdentityEmbeddingUpdate identity_embedding_update(const WeightedSample& sample,
                                                  const Mat& h, const Mat& r,
                                                  const Vec& y);

/// Centralized counterpart of the distributed filter: identical prediction
/// and resampling stream discipline, single update from the stacked
/// measurement. With the same seed it consumes draws in the same order as
/// any one distributed node.
class CentralizedFilter {
 public:
  CentralizedFilter(TransitionModel motion, std::vector<MeasurementModel> sensors,
                    FilterConfig config, const Vec& initial_mean, const Mat& initial_cov,
                    std::uint64_t stream_seed);

  struct StepOutput {
    Vec state;
    Mat cov;
    Vec raw_weights;
    Vec weights;
    double raw_weight_sum = 0.0;
    int qp_iterations = 0;
  };

  StepOutput step(const std::vector<Vec>& measurements);
  const WeightedSample& sample() const { return sample_; }

 private:
  TransitionModel motion_;
  std::vector<MeasurementModel> sensors_;
  FilterConfig config_;
  WeightedSample sample_;
  RandomStream stream_;
};

}  // namespace kmf
