#pragma once

#include <map>
#include <string>
#include <vector>

#include "kmf/types.hpp"

namespace kmf {

struct MethodMetrics {
  double rmse_pos = 0.0;
  double rmse_vel = 0.0;
  double aee_pos = 0.0;
  double aee_vel = 0.0;
};

struct MetricsTable {
  std::map<std::string, MethodMetrics> methods;
  /// Raw per-run position AEE (averaged over steps and nodes) per method.
  std::map<std::string, std::vector<double>> per_run_aee_pos;
};

/// Error metrics of one method.
///
/// truth:     [run][step] state vector
/// estimates: [run][step][node] estimate vector
///
/// Per step k, the squared and plain Euclidean errors of the position
/// (velocity) sub-vector are averaged over every run-and-node pair:
///   rmse_k = sqrt(mean ||err||^2),  aee_k = mean ||err||,
/// and the table cell averages rmse_k (aee_k) over the steps. aee_k <=
/// rmse_k holds per step and therefore for the averages.
MethodMetrics compute_metrics(const std::vector<std::vector<Vec>>& truth,
                              const std::vector<std::vector<std::vector<Vec>>>& estimates,
                              const std::vector<int>& pos_idx,
                              const std::vector<int>& vel_idx,
                              std::vector<double>* per_run_aee_pos = nullptr);

}  // namespace kmf
