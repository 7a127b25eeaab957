// Shared helpers for the test binaries: randomized filter instances and
// small generators. Everything here is independent of the code paths under
// test except where it deliberately drives them.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "kmf/cnf.hpp"
#include "kmf/consensus.hpp"
#include "kmf/dnf.hpp"
#include "kmf/embedding.hpp"
#include "kmf/kernels.hpp"
#include "kmf/random.hpp"

namespace kmf::testing {

inline Vec probability_vector(int m, RandomStream& stream) {
  Vec w(m);
  for (int l = 0; l < m; ++l) w[l] = -std::log(1.0 - stream.uniform());
  return w / w.sum();
}

inline Mat random_points(int dim, int count, RandomStream& stream, double scale = 1.0) {
  Mat pts(dim, count);
  for (int c = 0; c < count; ++c) pts.col(c) = scale * stream.gauss_vec(dim);
  return pts;
}

inline Mat random_spd(int m, RandomStream& stream, double ridge = 0.5) {
  Mat a(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) a(r, c) = stream.gauss();
  Mat s = a * a.transpose() / m;
  s.diagonal().array() += ridge;
  return s;
}

inline ConsensusGraph random_connected_graph(int n, RandomStream& stream,
                                             double extra_edge_prob = 0.3) {
  ConsensusGraph g;
  g.node_count = n;
  for (int v = 1; v < n; ++v) {
    g.edges.push_back({static_cast<int>(stream.uniform() * v), v});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (stream.uniform() < extra_edge_prob) {
        const std::pair<int, int> e{i, j};
        if (std::find(g.edges.begin(), g.edges.end(), e) == g.edges.end()) {
          g.edges.push_back(e);
        }
      }
    }
  }
  return g;
}

/// One randomized multi-sensor update problem over a shared sample:
/// smooth per-node measurement functions evaluated at the sample points,
/// SPD noise covariances and noisy measurements.
struct UpdateInstance {
  Mat points;
  Vec weights;
  GramContext gram;
  CenteredWeight centered;
  std::vector<Mat> meas_values;
  std::vector<Mat> noise_covs;
  std::vector<Vec> measurements;

  int node_count() const { return static_cast<int>(meas_values.size()); }
  int sample_count() const { return static_cast<int>(points.cols()); }
};

inline UpdateInstance make_update_instance(int nodes, int m, int n_y, int n_x,
                                           RandomStream& stream,
                                           double gram_reg = 1e-10) {
  Mat pts = random_points(n_x, m, stream, 1.5);
  Vec w = probability_vector(m, stream);
  GramContext gram = build_gram(KernelSpec::gaussian(2.0 * n_x), pts, gram_reg);
  CenteredWeight centered = centered_weight(w);
  UpdateInstance inst{std::move(pts), std::move(w), std::move(gram),
                      std::move(centered), {}, {}, {}};

  for (int i = 0; i < nodes; ++i) {
    Mat h_lin(n_y, n_x);
    for (int r = 0; r < n_y; ++r)
      for (int c = 0; c < n_x; ++c) h_lin(r, c) = stream.gauss();
    Mat values(n_y, m);
    for (int l = 0; l < m; ++l) {
      const Vec x = inst.points.col(l);
      Vec v = h_lin * x;
      for (int r = 0; r < n_y; ++r) v[r] += 0.3 * std::sin(x.sum() + r);
      values.col(l) = v;
    }
    Mat r_cov = random_spd(n_y, stream, 0.3);
    Vec y = values * inst.weights + psd_factor(r_cov) * stream.gauss_vec(n_y);
    inst.meas_values.push_back(std::move(values));
    inst.noise_covs.push_back(std::move(r_cov));
    inst.measurements.push_back(std::move(y));
  }
  return inst;
}

/// Per-node initial consensus terms through the library path (regularized
/// predicted mean from the Gram regression).
inline std::pair<Mat, Vec> node_terms(const UpdateInstance& inst, int i) {
  const Mat coeffs =
      fit_measurement_operator(inst.gram, {inst.meas_values[i], inst.noise_covs[i]});
  const Vec predicted = predicted_measurement_mean(inst.gram, coeffs, inst.weights);
  return consensus_init_terms(inst.node_count(), inst.centered.half, inst.meas_values[i],
                              inst.noise_covs[i], inst.measurements[i], predicted);
}

/// Exact network averages of the initial terms (the consensus limit).
inline std::pair<Mat, Vec> exact_average_terms(const UpdateInstance& inst) {
  const int n = inst.node_count();
  const int m = inst.sample_count();
  Mat gamma = Mat::Zero(m, m);
  Vec xi = Vec::Zero(m);
  for (int i = 0; i < n; ++i) {
    auto [g, x] = node_terms(inst, i);
    gamma += g;
    xi += x;
  }
  return {gamma / n, xi / n};
}

inline AugmentedMeasurement stack_instance(const UpdateInstance& inst) {
  std::vector<MeasurementSample> blocks;
  for (int i = 0; i < inst.node_count(); ++i) {
    blocks.push_back({inst.meas_values[i], inst.noise_covs[i]});
  }
  return augment(inst.measurements, blocks);
}

inline double qp_objective(const Mat& k, const Vec& target, const Vec& x) {
  const Vec d = x - target;
  return d.dot(k * d);
}

/// Exhaustive minimum of the QP objective over the simplex grid with the
/// given resolution, for m <= 4. Independent of the solver under test; the
/// m = 4 inner loop walks the quadratic incrementally.
inline double grid_search_best(const Mat& k, const Vec& target, double resolution) {
  const int m = static_cast<int>(target.size());
  const int ticks = static_cast<int>(std::round(1.0 / resolution));
  double best = std::numeric_limits<double>::infinity();
  Vec x(m);
  if (m == 2) {
    for (int i = 0; i <= ticks; ++i) {
      x[0] = i * resolution;
      x[1] = 1.0 - x[0];
      best = std::min(best, qp_objective(k, target, x));
    }
  } else if (m == 3) {
    for (int i = 0; i <= ticks; ++i) {
      for (int j = 0; i + j <= ticks; ++j) {
        x[0] = i * resolution;
        x[1] = j * resolution;
        x[2] = 1.0 - x[0] - x[1];
        best = std::min(best, qp_objective(k, target, x));
      }
    }
  } else if (m == 4) {
    for (int i = 0; i <= ticks; ++i) {
      for (int j = 0; i + j <= ticks; ++j) {
        x[0] = i * resolution;
        x[1] = j * resolution;
        x[2] = 0.0;
        x[3] = 1.0 - x[0] - x[1];
        Vec diff = x - target;
        const Vec dir = (Vec(4) << 0, 0, resolution, -resolution).finished();
        double f = diff.dot(k * diff);
        const double quad = dir.dot(k * dir);
        double slope = 2.0 * dir.dot(k * diff) + quad;
        const int inner = ticks - i - j;
        best = std::min(best, f);
        for (int c = 0; c < inner; ++c) {
          f += slope;
          slope += 2.0 * quad;
          best = std::min(best, f);
        }
      }
    }
  }
  return best;
}

}  // namespace kmf::testing
