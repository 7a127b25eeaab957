#include "kmf/consensus.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "kmf/errors.hpp"

namespace kmf {

ConsensusGraph ConsensusGraph::ring(int n) {
  ConsensusGraph g;
  g.node_count = n;
  if (n <= 1) return g;
  if (n == 2) {
    g.edges.push_back({0, 1});
    return g;
  }
  for (int i = 0; i < n; ++i) g.edges.push_back({i, (i + 1) % n});
  return g;
}

ConsensusGraph ConsensusGraph::complete(int n) {
  ConsensusGraph g;
  g.node_count = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.edges.push_back({i, j});
  return g;
}

ConsensusGraph ConsensusGraph::from_edges(int n, std::vector<std::pair<int, int>> edges) {
  ConsensusGraph g;
  g.node_count = n;
  for (auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw ArgumentError("graph edge index out of range");
    if (a == b) continue;  // self-weights are implied, never stored
    auto e = std::minmax(a, b);
    std::pair<int, int> p{e.first, e.second};
    if (std::find(g.edges.begin(), g.edges.end(), p) == g.edges.end()) g.edges.push_back(p);
  }
  return g;
}

std::vector<int> ConsensusGraph::degrees() const {
  std::vector<int> deg(node_count, 0);
  for (auto& [a, b] : edges) {
    ++deg[a];
    ++deg[b];
  }
  return deg;
}

std::vector<std::vector<int>> ConsensusGraph::components() const {
  std::vector<std::vector<int>> adj(node_count);
  for (auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<int> label(node_count, -1);
  std::vector<std::vector<int>> comps;
  for (int s = 0; s < node_count; ++s) {
    if (label[s] >= 0) continue;
    std::vector<int> stack{s};
    label[s] = static_cast<int>(comps.size());
    comps.emplace_back();
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      comps.back().push_back(v);
      for (int u : adj[v]) {
        if (label[u] < 0) {
          label[u] = label[s];
          stack.push_back(u);
        }
      }
    }
    std::sort(comps.back().begin(), comps.back().end());
  }
  return comps;
}

bool ConsensusGraph::connected() const { return components().size() <= 1; }

ConsensusWeights metropolis_weights(const ConsensusGraph& graph) {
  auto comps = graph.components();
  if (comps.size() > 1) {
    std::ostringstream os;
    os << "metropolis_weights: graph is disconnected; components:";
    for (const auto& c : comps) {
      os << " {";
      for (size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
      os << "}";
    }
    throw ConnectivityError(os.str());
  }
  const int n = graph.node_count;
  auto deg = graph.degrees();
  Mat a = Mat::Zero(n, n);
  for (auto& [i, j] : graph.edges) {
    const double w = 1.0 / (1.0 + std::max(deg[i], deg[j]));
    a(i, j) = w;
    a(j, i) = w;
  }
  for (int i = 0; i < n; ++i) a(i, i) = 1.0 - a.row(i).sum();
  return ConsensusWeights{std::move(a)};
}

double second_eigenvalue(const ConsensusWeights& weights) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(weights.matrix, Eigen::EigenvaluesOnly);
  Vec abs_vals = eig.eigenvalues().cwiseAbs();
  std::sort(abs_vals.data(), abs_vals.data() + abs_vals.size());
  const int n = static_cast<int>(abs_vals.size());
  return n >= 2 ? abs_vals[n - 2] : 0.0;
}

namespace {

void check_shapes(const std::vector<Mat>& values) {
  for (size_t i = 1; i < values.size(); ++i) {
    if (values[i].rows() != values[0].rows() || values[i].cols() != values[0].cols()) {
      throw ArgumentError("consensus: node tensors do not share one shape");
    }
  }
}

double max_pairwise_disagreement(const std::vector<Mat>& values) {
  if (values.size() < 2) return 0.0;
  Mat lo = values[0];
  Mat hi = values[0];
  for (size_t i = 1; i < values.size(); ++i) {
    lo = lo.cwiseMin(values[i]);
    hi = hi.cwiseMax(values[i]);
  }
  return (hi - lo).maxCoeff();
}

}  // namespace

std::vector<Mat> consensus_round(const ConsensusWeights& weights,
                                 const std::vector<Mat>& values) {
  const int n = weights.node_count();
  if (static_cast<int>(values.size()) != n) {
    throw ArgumentError("consensus_round: value count does not match node count");
  }
  check_shapes(values);
  std::vector<Mat> next(n);
  for (int i = 0; i < n; ++i) {
    Mat v = values[i];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double a = weights.matrix(i, j);
      if (a > 0.0) v.noalias() += a * (values[j] - values[i]);
    }
    next[i] = std::move(v);
  }
  return next;
}

std::int64_t ConsensusLedger::info_pair_message_bytes(int sample_count) {
  const std::int64_t m = sample_count;
  return m * (m + 1) * 8;
}

std::int64_t ConsensusLedger::raw_message_bytes(int sample_count, int meas_dim) {
  const std::int64_t m = sample_count;
  const std::int64_t ny = meas_dim;
  return (ny * m + ny * ny + ny) * 8;
}

std::pair<std::vector<Mat>, ConsensusLedger> run_consensus(
    const ConsensusWeights& weights, std::vector<Mat> values,
    const ConsensusStop& stop) {
  if (stop.max_rounds < 1 && !(stop.tol > 0.0)) {
    throw ArgumentError("run_consensus: need max_rounds >= 1 or tol > 0");
  }
  check_shapes(values);
  const auto edge_count = [&weights] {
    std::int64_t e = 0;
    const int n = weights.node_count();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (weights.matrix(i, j) > 0.0) ++e;
    return e;
  }();

  ConsensusLedger ledger;
  while (ledger.rounds < stop.max_rounds) {
    if (max_pairwise_disagreement(values) <= stop.tol) break;
    values = consensus_round(weights, values);
    ++ledger.rounds;
  }
  ledger.directed_messages = 2 * edge_count * ledger.rounds;
  ledger.final_disagreement = max_pairwise_disagreement(values);
  ledger.converged = ledger.final_disagreement <= stop.tol;
  return {std::move(values), ledger};
}

}  // namespace kmf
