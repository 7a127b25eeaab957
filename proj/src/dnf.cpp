#include "kmf/dnf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "kmf/errors.hpp"
#include "kmf/simplex_qp.hpp"

namespace kmf {

void FilterConfig::validate() const {
  if (sample_count < 2) throw ConfigError("filter: sample_count must be >= 2");
  const double floor = resolved_floor();
  if (floor * sample_count >= 1.0) {
    throw ConfigError("filter: weight_floor * sample_count must stay below 1");
  }
  kernel.validate();
}

void require_spd(const Mat& cov, const char* what) {
  std::ostringstream os;
  if (cov.rows() != cov.cols()) {
    os << what << ": covariance is not square";
    throw CovarianceError(os.str());
  }
  if (!cov.isApprox(cov.transpose(), 1e-10)) {
    os << what << ": covariance is not symmetric";
    throw CovarianceError(os.str());
  }
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() != Eigen::Success) {
    os << what << ": covariance is not positive definite";
    throw CovarianceError(os.str());
  }
}

WeightedSample predict(const WeightedSample& sample, const TransitionModel& motion,
                       RandomStream& stream) {
  WeightedSample out = sample;  // weights carry over unchanged
  for (int l = 0; l < sample.count(); ++l) {
    const Vec noise = motion.noise_factor * stream.gauss_vec(motion.noise_dim);
    out.points.col(l) = motion.apply(sample.points.col(l), noise);
  }
  return out;
}

std::pair<Mat, Vec> consensus_init_terms(int node_count, const Mat& weight_half,
                                         const Mat& meas_values, const Mat& noise_cov,
                                         const Vec& measurement, const Vec& predicted_mean) {
  require_spd(noise_cov, "consensus_init_terms");
  const int m = static_cast<int>(weight_half.rows());
  if (meas_values.cols() != m || measurement.size() != meas_values.rows() ||
      predicted_mean.size() != measurement.size() ||
      noise_cov.rows() != meas_values.rows()) {
    throw ArgumentError("consensus_init_terms: inconsistent shapes");
  }
  Eigen::LLT<Mat> noise_chol(noise_cov);
  const Mat scaled = meas_values * weight_half;            // n_y x m
  const Mat whitened = noise_chol.solve(scaled);           // R^{-1} Y Wh
  Mat gamma = static_cast<double>(node_count) * scaled.transpose() * whitened;
  gamma.diagonal().array() += 1.0;
  Vec xi = static_cast<double>(node_count) *
           (scaled.transpose() * noise_chol.solve(measurement - predicted_mean));
  return {std::move(gamma), std::move(xi)};
}

Vec posterior_weights(const Vec& weights, const Mat& weight_half, const Mat& gamma,
                      const Vec& xi) {
  Eigen::LLT<Mat> chol(gamma);
  if (chol.info() != Eigen::Success) {
    throw NumericalError("posterior_weights: consensus matrix is not positive definite");
  }
  return weights + weight_half * chol.solve(xi);
}

Vec normalize_weights(const Vec& raw, const GramContext& gram, double floor,
                      int* qp_iterations) {
  Mat metric = gram.kernel_matrix();
  metric.diagonal().array() += gram.regularizer();
  QpResult qp = min_quadratic_on_simplex(metric, raw, floor);
  if (qp_iterations) *qp_iterations = qp.iterations;
  return qp.solution;
}

WeightedSample resample(const WeightedSample& sample, RandomStream& stream) {
  const int m = sample.count();
  Vec cdf(m);
  double acc = 0.0;
  for (int l = 0; l < m; ++l) {
    acc += sample.weights[l];
    cdf[l] = acc;
  }
  WeightedSample out;
  out.points.resize(sample.dim(), m);
  out.weights = Vec::Constant(m, 1.0 / m);
  out.floor = sample.floor;
  for (int j = 0; j < m; ++j) {
    const double u = stream.uniform() * acc;
    int idx = static_cast<int>(std::upper_bound(cdf.data(), cdf.data() + m, u) - cdf.data());
    idx = std::min(idx, m - 1);
    out.points.col(j) = sample.points.col(idx);
  }
  return out;
}

std::pair<Vec, Mat> state_estimate(const WeightedSample& sample) {
  const Vec mean = sample.points * sample.weights;
  const Mat centered = sample.points.colwise() - mean;
  Mat cov = centered * sample.weights.asDiagonal() * centered.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  return {mean, cov};
}

WeightedSample make_initial_sample(const Vec& mean, const Mat& cov, int count,
                                   double floor, RandomStream& stream) {
  const Mat factor = psd_factor(cov);
  WeightedSample sample;
  sample.points.resize(mean.size(), count);
  for (int l = 0; l < count; ++l) {
    sample.points.col(l) = mean + factor * stream.gauss_vec(static_cast<int>(mean.size()));
  }
  sample.weights = Vec::Constant(count, 1.0 / count);
  sample.floor = floor;
  return sample;
}

DistributedFilter::DistributedFilter(const ConsensusGraph& graph, TransitionModel motion,
                                     std::vector<MeasurementModel> sensors,
                                     FilterConfig config, const Vec& initial_mean,
                                     const Mat& initial_cov, std::uint64_t stream_seed)
    : mixing_(metropolis_weights(graph)),
      motion_(std::move(motion)),
      sensors_(std::move(sensors)),
      config_(config) {
  config_.validate();
  if (static_cast<int>(sensors_.size()) != graph.node_count) {
    throw ArgumentError("DistributedFilter: one sensor model per node required");
  }
  for (const auto& s : sensors_) require_spd(s.noise_cov, "sensor noise covariance");

  RandomStream stream(stream_seed);
  WeightedSample initial = make_initial_sample(initial_mean, initial_cov,
                                               config_.sample_count,
                                               config_.resolved_floor(), stream);
  nodes_.reserve(sensors_.size());
  for (size_t i = 0; i < sensors_.size(); ++i) {
    // Every node holds a copy of the same stream, positioned identically.
    nodes_.push_back(Node{initial, stream});
  }
}

DistributedFilter::StepOutput DistributedFilter::step(const std::vector<Vec>& measurements) {
  const int n = node_count();
  const int m = config_.sample_count;
  if (static_cast<int>(measurements.size()) != n) {
    throw ArgumentError("step: one measurement per node required");
  }

  for (auto& node : nodes_) {
    node.sample = predict(node.sample, motion_, node.stream);
  }

  std::vector<GramContext> grams;
  std::vector<CenteredWeight> centered;
  std::vector<Mat> payloads(n);
  grams.reserve(n);
  centered.reserve(n);
  for (int i = 0; i < n; ++i) {
    const WeightedSample& sample = nodes_[i].sample;
    grams.push_back(build_gram(config_.kernel, sample.points, config_.gram_reg()));
    centered.push_back(centered_weight(sample.weights));

    Mat values(sensors_[i].dim, m);
    for (int l = 0; l < m; ++l) values.col(l) = sensors_[i].observe(sample.points.col(l));

    const Mat coeffs = fit_measurement_operator(grams[i], {values, sensors_[i].noise_cov});
    const Vec predicted = predicted_measurement_mean(grams[i], coeffs, sample.weights);
    auto [gamma, xi] = consensus_init_terms(n, centered[i].half, values,
                                            sensors_[i].noise_cov, measurements[i], predicted);
    payloads[i].resize(m, m + 1);
    payloads[i].leftCols(m) = gamma;
    payloads[i].col(m) = xi;
  }

  auto [mixed, ledger] = run_consensus(mixing_, std::move(payloads), config_.consensus);

  StepOutput out;
  out.ledger = ledger;
  out.info_pair_bytes_per_message = ConsensusLedger::info_pair_message_bytes(m);
  out.nodes.resize(n);
  const double floor = config_.resolved_floor();
  for (int i = 0; i < n; ++i) {
    Node& node = nodes_[i];
    NodeOutput& res = out.nodes[i];
    const Mat gamma = mixed[i].leftCols(m);
    const Vec xi = mixed[i].col(m);
    res.raw_weights = posterior_weights(node.sample.weights, centered[i].half, gamma, xi);
    res.raw_weight_sum = res.raw_weights.sum();
    res.weights = normalize_weights(res.raw_weights, grams[i], floor, &res.qp_iterations);
    res.raw_bytes_per_message = ConsensusLedger::raw_message_bytes(m, sensors_[i].dim);

    // The update touches only the weights; the points are reused as the
    // posterior sample.
    node.sample.weights = res.weights;
    std::tie(res.state, res.cov) = state_estimate(node.sample);

    switch (config_.resample.mode) {
      case ResamplePolicy::Mode::EveryStep:
        node.sample = resample(node.sample, node.stream);
        break;
      case ResamplePolicy::Mode::EssThreshold: {
        // Draws are consumed either way so the node streams stay aligned
        // even when nodes decide differently.
        WeightedSample candidate = resample(node.sample, node.stream);
        const double ess = 1.0 / res.weights.squaredNorm();
        if (ess < config_.resample.ess_fraction * m) node.sample = std::move(candidate);
        break;
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = (nodes_[i].sample.points - nodes_[j].sample.points)
                           .cwiseAbs()
                           .maxCoeff();
      out.sample_drift = std::max(out.sample_drift, d);
    }
  }
  return out;
}

}  // namespace kmf
