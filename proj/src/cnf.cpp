#include "kmf/cnf.hpp"

#include <Eigen/Cholesky>

#include "kmf/errors.hpp"

namespace kmf {

AugmentedMeasurement augment(const std::vector<Vec>& measurements,
                             const std::vector<MeasurementSample>& samples) {
  if (measurements.empty() || measurements.size() != samples.size()) {
    throw ArgumentError("augment: need one measurement per sample block");
  }
  const int m = static_cast<int>(samples[0].values.cols());
  int total = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].values.cols() != m) {
      throw ArgumentError("augment: inconsistent sample sizes across nodes");
    }
    if (measurements[i].size() != samples[i].values.rows()) {
      throw ArgumentError("augment: measurement and sample dimensions differ");
    }
    total += static_cast<int>(samples[i].values.rows());
  }

  AugmentedMeasurement aug;
  aug.measurement.resize(total);
  aug.values.resize(total, m);
  aug.noise_cov = Mat::Zero(total, total);
  int at = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const int d = static_cast<int>(samples[i].values.rows());
    aug.measurement.segment(at, d) = measurements[i];
    aug.values.middleRows(at, d) = samples[i].values;
    aug.noise_cov.block(at, at, d, d) = samples[i].noise_cov;
    aug.block_dims.push_back(d);
    at += d;
  }
  return aug;
}

Vec measurement_space_update(const Vec& weights, const Mat& centered_full,
                             const Mat& meas_values, const Mat& noise_cov,
                             const Vec& innovation) {
  const Mat cross = centered_full * meas_values.transpose();  // m x n_y
  Mat s = meas_values * cross + noise_cov;
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::LDLT<Mat> solver(s);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("centralized update: innovation covariance solve failed");
  }
  return weights + cross * solver.solve(innovation);
}

namespace {

Vec stacked_predicted_mean(const AugmentedMeasurement& aug, const GramContext& gram,
                           const Vec& weights) {
  const Mat coeffs = fit_measurement_operator(gram, {aug.values, aug.noise_cov});
  return predicted_measurement_mean(gram, coeffs, weights);
}

}  // namespace

Vec centralized_posterior_weights(const Vec& weights, const CenteredWeight& centered,
                                  const AugmentedMeasurement& aug, const GramContext& gram) {
  const Vec predicted = stacked_predicted_mean(aug, gram, weights);
  return measurement_space_update(weights, centered.full, aug.values, aug.noise_cov,
                                  aug.measurement - predicted);
}

Vec centralized_posterior_weights_info_form(const Vec& weights,
                                            const CenteredWeight& centered,
                                            const AugmentedMeasurement& aug,
                                            const GramContext& gram) {
  const Vec predicted = stacked_predicted_mean(aug, gram, weights);
  const Mat scaled = aug.values * centered.half;
  Eigen::LLT<Mat> noise_chol(aug.noise_cov);
  if (noise_chol.info() != Eigen::Success) {
    throw CovarianceError("centralized update: stacked noise covariance is not PD");
  }
  Mat gamma = scaled.transpose() * noise_chol.solve(scaled);
  gamma.diagonal().array() += 1.0;
  const Vec xi = scaled.transpose() * noise_chol.solve(aug.measurement - predicted);
  return posterior_weights(weights, centered.half, gamma, xi);
}

std::pair<Vec, Mat> kalman_measurement_update(const Vec& mean, const Mat& cov,
                                              const Mat& h, const Mat& r, const Vec& y) {
  Mat s = h * cov * h.transpose() + r;
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::LLT<Mat> chol(s);
  if (chol.info() != Eigen::Success) {
    throw CovarianceError("kalman update: innovation covariance is not positive definite");
  }
  const Mat gain = chol.solve(h * cov).transpose();  // P H^T S^{-1}
  const Vec updated_mean = mean + gain * (y - h * mean);
  const Mat identity = Mat::Identity(cov.rows(), cov.cols());
  const Mat closed = identity - gain * h;
  Mat updated_cov = closed * cov * closed.transpose() + gain * r * gain.transpose();
  updated_cov = 0.5 * (updated_cov + updated_cov.transpose()).eval();
  return {updated_mean, updated_cov};
}

std::pair<Vec, Mat> kalman_step(const Vec& mean, const Mat& cov, const Mat& f,
                                const Mat& q, const Mat& h, const Mat& r, const Vec& y) {
  const Vec predicted_mean = f * mean;
  const Mat predicted_cov = f * cov * f.transpose() + q;
  return kalman_measurement_update(predicted_mean, predicted_cov, h, r, y);
}

IdentityEmbeddingUpdate identity_embedding_update(const WeightedSample& sample,
                                                  const Mat& h, const Mat& r,
                                                  const Vec& y) {
  const CenteredWeight centered = centered_weight(sample.weights);
  const Mat values = h * sample.points;  // noiseless linear measurements
  const Vec predicted = values * sample.weights;
  const Vec nu = measurement_space_update(sample.weights, centered.full, values, r,
                                          y - predicted);

  IdentityEmbeddingUpdate out;
  out.posterior_weights = nu;
  out.weight_space_mean = sample.points * nu;

  const auto [mean, cov] = state_estimate(sample);
  out.moment_space_mean = kalman_measurement_update(mean, cov, h, r, y).first;
  return out;
}

CentralizedFilter::CentralizedFilter(TransitionModel motion,
                                     std::vector<MeasurementModel> sensors,
                                     FilterConfig config, const Vec& initial_mean,
                                     const Mat& initial_cov, std::uint64_t stream_seed)
    : motion_(std::move(motion)),
      sensors_(std::move(sensors)),
      config_(config),
      stream_(stream_seed) {
  config_.validate();
  if (sensors_.empty()) throw ArgumentError("CentralizedFilter: need at least one sensor");
  for (const auto& s : sensors_) require_spd(s.noise_cov, "sensor noise covariance");
  sample_ = make_initial_sample(initial_mean, initial_cov, config_.sample_count,
                                config_.resolved_floor(), stream_);
}

CentralizedFilter::StepOutput CentralizedFilter::step(const std::vector<Vec>& measurements) {
  if (measurements.size() != sensors_.size()) {
    throw ArgumentError("step: one measurement per sensor required");
  }
  sample_ = predict(sample_, motion_, stream_);

  const int m = config_.sample_count;
  GramContext gram = build_gram(config_.kernel, sample_.points, config_.gram_reg());
  const CenteredWeight centered = centered_weight(sample_.weights);

  std::vector<MeasurementSample> blocks;
  blocks.reserve(sensors_.size());
  for (const auto& sensor : sensors_) {
    Mat values(sensor.dim, m);
    for (int l = 0; l < m; ++l) values.col(l) = sensor.observe(sample_.points.col(l));
    blocks.push_back({std::move(values), sensor.noise_cov});
  }
  const AugmentedMeasurement aug = augment(measurements, blocks);

  StepOutput out;
  out.raw_weights = centralized_posterior_weights(sample_.weights, centered, aug, gram);
  out.raw_weight_sum = out.raw_weights.sum();
  out.weights = normalize_weights(out.raw_weights, gram, config_.resolved_floor(),
                                  &out.qp_iterations);
  sample_.weights = out.weights;
  std::tie(out.state, out.cov) = state_estimate(sample_);

  switch (config_.resample.mode) {
    case ResamplePolicy::Mode::EveryStep:
      sample_ = resample(sample_, stream_);
      break;
    case ResamplePolicy::Mode::EssThreshold: {
      WeightedSample candidate = resample(sample_, stream_);
      const double ess = 1.0 / out.weights.squaredNorm();
      if (ess < config_.resample.ess_fraction * m) sample_ = std::move(candidate);
      break;
    }
  }
  return out;
}

}  // namespace kmf
