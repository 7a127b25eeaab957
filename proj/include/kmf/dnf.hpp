#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kmf/consensus.hpp"
#include "kmf/embedding.hpp"
#include "kmf/filter_model.hpp"
#include "kmf/random.hpp"

namespace kmf {

/// Prediction: propagates every sample point through the transition with a
/// fresh noise draw and keeps the weights unchanged. Nodes holding streams
/// at the same position produce bit-identical outputs.
WeightedSample predict(const WeightedSample& sample, const TransitionModel& motion,
                       RandomStream& stream);

/// Initial consensus payload of one node:
///   matrix: n * Wh Y^T R^{-1} Y Wh + I   (symmetric, eigenvalues >= 1)
///   vector: n * Wh Y^T R^{-1} (y - y_hat)
/// where Wh is the symmetric square root of the centered weight matrix and
/// y_hat the predicted measurement mean.
std::pair<Mat, Vec> consensus_init_terms(int node_count, const Mat& weight_half,
                                         const Mat& meas_values, const Mat& noise_cov,
                                         const Vec& measurement, const Vec& predicted_mean);

/// Posterior weight vector w + Wh * gamma^{-1} * xi. Sums to one when the
/// consensus terms equal their network averages.
Vec posterior_weights(const Vec& weights, const Mat& weight_half, const Mat& gamma,
                      const Vec& xi);

/// Projects raw posterior weights back onto the feasible set by minimizing
/// the empirical maximum mean discrepancy between the two embeddings,
/// i.e. the Gram-weighted quadratic distance, subject to the simplex
/// constraints with the configured weight floor.
Vec normalize_weights(const Vec& raw, const GramContext& gram, double floor,
                      int* qp_iterations = nullptr);

/// Draws a same-size i.i.d. sample from the weighted discrete distribution;
/// output weights are uniform.
WeightedSample resample(const WeightedSample& sample, RandomStream& stream);

/// Posterior mean and covariance of a weighted sample.
std::pair<Vec, Mat> state_estimate(const WeightedSample& sample);

/// The distributed filter: one instance owns every node of the network and
/// advances them synchronously. Each node runs prediction, measurement
/// regression, consensus mixing of its information pair, the weight update,
/// normalization and resampling on its own state; nodes interact only
/// through the consensus rounds.
class DistributedFilter {
 public:
  DistributedFilter(const ConsensusGraph& graph, TransitionModel motion,
                    std::vector<MeasurementModel> sensors, FilterConfig config,
                    const Vec& initial_mean, const Mat& initial_cov,
                    std::uint64_t stream_seed);

  struct NodeOutput {
    Vec state;
    Mat cov;
    Vec raw_weights;
    Vec weights;
    double raw_weight_sum = 0.0;
    int qp_iterations = 0;
    std::int64_t raw_bytes_per_message = 0;
  };

  struct StepOutput {
    std::vector<NodeOutput> nodes;
    ConsensusLedger ledger;
    std::int64_t info_pair_bytes_per_message = 0;
    /// Largest entrywise difference between any two nodes' point sets after
    /// the step; nonzero only when finite consensus left the nodes with
    /// different normalized weights.
    double sample_drift = 0.0;
  };

  StepOutput step(const std::vector<Vec>& measurements);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  const WeightedSample& node_sample(int i) const { return nodes_[i].sample; }
  const FilterConfig& config() const { return config_; }

 private:
  struct Node {
    WeightedSample sample;
    RandomStream stream;
  };

  ConsensusWeights mixing_;
  TransitionModel motion_;
  std::vector<MeasurementModel> sensors_;
  FilterConfig config_;
  std::vector<Node> nodes_;
};

/// Initial sample shared by all nodes: points drawn from N(mean, cov),
/// uniform weights.
WeightedSample make_initial_sample(const Vec& mean, const Mat& cov, int count,
                                   double floor, RandomStream& stream);

/// Validates that a covariance is symmetric positive definite.
void require_spd(const Mat& cov, const char* what);

}  // namespace kmf
