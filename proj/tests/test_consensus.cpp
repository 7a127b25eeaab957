#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kmf/consensus.hpp"
#include "kmf/errors.hpp"
#include "kmf/random.hpp"

using namespace kmf;

namespace {

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

ConsensusGraph random_connected_graph(int n, RandomStream& stream) {
  ConsensusGraph g;
  g.node_count = n;
  // Random spanning tree first, then extra edges with probability 0.3.
  for (int v = 1; v < n; ++v) {
    const int parent = static_cast<int>(stream.uniform() * v);
    g.edges.push_back({parent, v});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (stream.uniform() < 0.3) {
        const std::pair<int, int> e{i, j};
        if (std::find(g.edges.begin(), g.edges.end(), e) == g.edges.end()) {
          g.edges.push_back(e);
        }
      }
    }
  }
  return g;
}

double deviation_from_mean(const std::vector<Mat>& values) {
  Mat mean = values[0];
  for (size_t i = 1; i < values.size(); ++i) mean += values[i];
  mean /= static_cast<double>(values.size());
  double acc = 0.0;
  for (const auto& v : values) acc += (v - mean).squaredNorm();
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("metropolis weights of a two-node graph") {
  const ConsensusWeights w = metropolis_weights(ConsensusGraph::ring(2));
  Mat expected(2, 2);
  expected << 0.5, 0.5, 0.5, 0.5;
  CHECK((w.matrix - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("metropolis weights of a three-node path") {
  // By the edge rule 1/(1 + max(deg_i, deg_j)): both edges carry 1/3.
  const ConsensusGraph path = ConsensusGraph::from_edges(3, {{0, 1}, {1, 2}});
  const ConsensusWeights w = metropolis_weights(path);
  Mat expected(3, 3);
  expected << 2.0 / 3.0, 1.0 / 3.0, 0.0,
              1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0,
              0.0, 1.0 / 3.0, 2.0 / 3.0;
  CHECK((w.matrix - expected).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((w.matrix.rowwise().sum() - Vec::Ones(3)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((w.matrix.colwise().sum().transpose() - Vec::Ones(3)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("metropolis weights of complete graphs are uniform") {
  for (int n : {3, 5, 8}) {
    const ConsensusWeights w = metropolis_weights(ConsensusGraph::complete(n));
    CHECK((w.matrix - Mat::Constant(n, n, 1.0 / n)).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("metropolis weights satisfy the mixing-matrix invariants") {
  RandomStream stream(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(stream.uniform() * 9);
    const ConsensusGraph g = random_connected_graph(n, stream);
    const ConsensusWeights w = metropolis_weights(g);

    CHECK((w.matrix - w.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((w.matrix.rowwise().sum() - Vec::Ones(n)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((w.matrix.colwise().sum().transpose() - Vec::Ones(n)).cwiseAbs().maxCoeff() <= 1e-12);
    for (int i = 0; i < n; ++i) CHECK(w.matrix(i, i) > 0.0);

    // Positive exactly on edges and the diagonal.
    auto has_edge = [&g](int i, int j) {
      return std::find(g.edges.begin(), g.edges.end(),
                       std::make_pair(std::min(i, j), std::max(i, j))) != g.edges.end();
    };
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        CHECK((w.matrix(i, j) > 0.0) == has_edge(i, j));
      }
    }
  }
}

TEST_CASE("disconnected graph is rejected with its components") {
  const ConsensusGraph g = ConsensusGraph::from_edges(4, {{0, 1}, {2, 3}});
  try {
    metropolis_weights(g);
    FAIL("expected ConnectivityError");
  } catch (const ConnectivityError& e) {
    CHECK(std::string(e.what()).find("{0,1} {2,3}") != std::string::npos);
  }
}

TEST_CASE("consensus round fixes equal values and averages a pair") {
  const ConsensusWeights pair = metropolis_weights(ConsensusGraph::ring(2));

  const std::vector<Mat> same{scalar(1.5), scalar(1.5)};
  const auto fixed = consensus_round(pair, same);
  CHECK(fixed[0](0, 0) == 1.5);
  CHECK(fixed[1](0, 0) == 1.5);

  const auto mixed = consensus_round(pair, {scalar(0.0), scalar(2.0)});
  CHECK(mixed[0](0, 0) == doctest::Approx(1.0));
  CHECK(mixed[1](0, 0) == doctest::Approx(1.0));
}

TEST_CASE("consensus round rejects mismatched shapes") {
  const ConsensusWeights pair = metropolis_weights(ConsensusGraph::ring(2));
  CHECK_THROWS_AS(consensus_round(pair, {Mat::Zero(2, 2), Mat::Zero(3, 2)}), ArgumentError);
}

TEST_CASE("three-node path contracts toward the mean at the spectral rate") {
  const ConsensusGraph path = ConsensusGraph::from_edges(3, {{0, 1}, {1, 2}});
  const ConsensusWeights w = metropolis_weights(path);
  const double rate = second_eigenvalue(w);

  std::vector<Mat> values{scalar(3.0), scalar(0.0), scalar(0.0)};
  const double initial = deviation_from_mean(values);
  for (int r = 1; r <= 20; ++r) {
    values = consensus_round(w, values);
    const double bound = std::pow(rate, r) * initial;
    for (const auto& v : values) {
      CHECK(std::abs(v(0, 0) - 1.0) <= bound + 1e-12);
    }
  }
}

TEST_CASE("mean preservation and contraction on random graphs") {
  RandomStream stream(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(stream.uniform() * 9);  // <= 10
    const ConsensusGraph g = random_connected_graph(n, stream);
    const ConsensusWeights w = metropolis_weights(g);
    const double rate = second_eigenvalue(w);

    std::vector<Mat> values;
    Mat mean = Mat::Zero(2, 3);
    for (int i = 0; i < n; ++i) {
      Mat v(2, 3);
      for (int r = 0; r < v.size(); ++r) v(r / 3, r % 3) = stream.gauss();
      values.push_back(v);
      mean += v;
    }
    mean /= n;

    const double initial = deviation_from_mean(values);
    for (int r = 1; r <= 10; ++r) {
      values = consensus_round(w, values);

      Mat new_mean = Mat::Zero(2, 3);
      for (const auto& v : values) new_mean += v;
      new_mean /= n;
      CHECK((new_mean - mean).cwiseAbs().maxCoeff() <= 1e-12);

      CHECK(deviation_from_mean(values) <=
            std::pow(rate + 1e-9, r) * initial + 1e-12);
    }
  }
}

TEST_CASE("run_consensus with infinite tolerance returns immediately") {
  const ConsensusWeights pair = metropolis_weights(ConsensusGraph::ring(2));
  ConsensusStop stop;
  stop.tol = std::numeric_limits<double>::infinity();
  auto [values, ledger] = run_consensus(pair, {scalar(0.0), scalar(2.0)}, stop);
  CHECK(ledger.rounds == 0);
  CHECK(ledger.directed_messages == 0);
  CHECK(ledger.converged);
  CHECK(values[0](0, 0) == 0.0);
  CHECK(values[1](0, 0) == 2.0);
}

TEST_CASE("run_consensus on a ring reaches the exact mean") {
  RandomStream stream(29);
  const ConsensusWeights ring = metropolis_weights(ConsensusGraph::ring(5));
  std::vector<Mat> values;
  double mean = 0.0;
  for (int i = 0; i < 5; ++i) {
    values.push_back(scalar(stream.gauss()));
    mean += values.back()(0, 0);
  }
  mean /= 5.0;

  ConsensusStop stop;
  stop.max_rounds = 2000;
  stop.tol = 1e-10;
  auto [mixed, ledger] = run_consensus(ring, values, stop);
  CHECK(ledger.converged);
  for (const auto& v : mixed) CHECK(std::abs(v(0, 0) - mean) <= 1e-10);
}

TEST_CASE("single round on a pair reports one round and two messages") {
  const ConsensusWeights pair = metropolis_weights(ConsensusGraph::ring(2));
  ConsensusStop stop;
  stop.max_rounds = 1;
  stop.tol = 0.0;
  auto [values, ledger] = run_consensus(pair, {scalar(0.0), scalar(2.0)}, stop);
  CHECK(ledger.rounds == 1);
  CHECK(ledger.directed_messages == 2);
  CHECK(values[0](0, 0) == doctest::Approx(1.0));
  CHECK(values[1](0, 0) == doctest::Approx(1.0));
}

TEST_CASE("message byte accounting for both encodings") {
  CHECK(ConsensusLedger::info_pair_message_bytes(50) == 50 * 51 * 8);
  CHECK(ConsensusLedger::raw_message_bytes(50, 2) == (2 * 50 + 4 + 2) * 8);
  CHECK(ConsensusLedger::info_pair_message_bytes(60) == 60 * 61 * 8);
  CHECK(ConsensusLedger::raw_message_bytes(60, 3) == (3 * 60 + 9 + 3) * 8);
}

TEST_CASE("graph components and connectivity") {
  CHECK(ConsensusGraph::ring(1).connected());
  CHECK(ConsensusGraph::ring(4).connected());
  CHECK_FALSE(ConsensusGraph::from_edges(3, {{0, 1}}).connected());
  const auto comps = ConsensusGraph::from_edges(5, {{0, 2}, {1, 3}}).components();
  CHECK(comps.size() == 3);
}
