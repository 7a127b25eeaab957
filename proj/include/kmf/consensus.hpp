#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kmf/types.hpp"

namespace kmf {

/// Undirected sensor-network graph. Self-loops are implied (every node mixes
/// with itself) and never stored.
struct ConsensusGraph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;

  static ConsensusGraph ring(int n);
  static ConsensusGraph complete(int n);
  static ConsensusGraph from_edges(int n, std::vector<std::pair<int, int>> edges);

  std::vector<int> degrees() const;
  std::vector<std::vector<int>> components() const;
  bool connected() const;
};

/// Doubly stochastic mixing matrix over the graph.
struct ConsensusWeights {
  Mat matrix;  // n x n

  int node_count() const { return static_cast<int>(matrix.rows()); }
};

/// Metropolis weights: a_ij = 1 / (1 + max(deg_i, deg_j)) on edges,
/// a_ii absorbs the remainder. Symmetric and doubly stochastic on any
/// connected graph using only local degree information.
ConsensusWeights metropolis_weights(const ConsensusGraph& graph);

/// Second-largest absolute eigenvalue of the mixing matrix; governs the
/// per-round contraction of disagreement.
double second_eigenvalue(const ConsensusWeights& weights);

/// One synchronous mixing round: new_i = old_i + sum_j a_ij (old_j - old_i).
/// Every node holds one tensor; all tensors must share a shape. The node
/// average of every entry is preserved.
std::vector<Mat> consensus_round(const ConsensusWeights& weights,
                                 const std::vector<Mat>& values);

struct ConsensusStop {
  int max_rounds = 500;
  double tol = 1e-10;
};

/// Round and message accounting, including the two payload encodings
/// compared for communication cost: the mixed matrix/vector pair versus the
/// raw per-sensor measurement data.
struct ConsensusLedger {
  int rounds = 0;
  std::int64_t directed_messages = 0;
  bool converged = false;
  double final_disagreement = 0.0;

  /// Bytes per message when a node transmits its m x m matrix and m-vector.
  static std::int64_t info_pair_message_bytes(int sample_count);
  /// Bytes per message when a node transmits its n_y x m noiseless
  /// measurement matrix, n_y x n_y noise covariance and n_y measurement.
  static std::int64_t raw_message_bytes(int sample_count, int meas_dim);
};

/// Runs mixing rounds until the max pairwise disagreement (infinity norm
/// over entries) drops to stop.tol or stop.max_rounds is reached.
/// Non-convergence is reported through the ledger, not as an error.
std::pair<std::vector<Mat>, ConsensusLedger> run_consensus(
    const ConsensusWeights& weights, std::vector<Mat> values,
    const ConsensusStop& stop);

}  // namespace kmf
