#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kmf/metrics.hpp"
#include "kmf/scenarios.hpp"

namespace kmf {

struct ExperimentOptions {
  bool with_centralized = false;
  bool with_baseline = false;
  std::string out_dir;  // empty: no trace/summary files written
  int threads = 0;      // 0: hardware concurrency
};

/// estimates[run][step][node]
using EstimateTrajectories = std::vector<std::vector<std::vector<Vec>>>;

struct ExperimentResult {
  MetricsTable metrics;
  nlohmann::json summary;
  int divergences = 0;
  double rounds_mean = 0.0;
  std::int64_t bytes_info_pair_per_message = 0;
  std::int64_t bytes_raw_per_message = 0;
  double sample_drift_max = 0.0;
  std::vector<std::vector<Vec>> truths;  // [run][step]
  std::map<std::string, EstimateTrajectories> estimates;
};

/// Runs the configured number of Monte Carlo replications of the distributed
/// filter (plus the optional centralized filter and prediction-only
/// baseline), computes the metrics table and writes traces and the summary
/// when an output directory is set. Runs execute in a thread pool; each run
/// owns its state and results are aggregated in run order, so the output is
/// independent of scheduling.
ExperimentResult run_experiment(const ScenarioConfig& config,
                                const ExperimentOptions& options);

}  // namespace kmf
