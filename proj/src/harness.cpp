#include "kmf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include "kmf/cnf.hpp"
#include "kmf/dnf.hpp"
#include "kmf/errors.hpp"

namespace kmf {

namespace {

using nlohmann::json;

struct TraceRow {
  int step = 0;
  int node = 0;
  Vec state;
  double cov_trace = 0.0;
  double weight_sum = 0.0;
  int qp_iterations = 0;
  int consensus_rounds = 0;
  std::int64_t bytes_info_pair = 0;
  std::int64_t bytes_raw = 0;
};

struct RunOutput {
  bool diverged = false;
  std::vector<std::vector<Vec>> dnf;       // [step][node]
  std::vector<std::vector<Vec>> cnf;       // [step][1]
  std::vector<std::vector<Vec>> baseline;  // [step][1]
  std::vector<Vec> truth;                  // [step]
  double rounds_sum = 0.0;
  int steps_done = 0;
  double drift_max = 0.0;
  std::map<std::string, std::vector<TraceRow>> traces;
};

std::uint64_t run_seed(std::uint64_t master, int run) {
  return detail::splitmix64(master ^ detail::splitmix64(0x72756e00ULL + run));
}

void write_trace(const std::string& dir, const std::string& scenario, int run,
                 const std::string& method, const std::vector<TraceRow>& rows,
                 int state_dim) {
  std::filesystem::path path(dir);
  path /= scenario + "_run" + std::to_string(run) + "_" + method + ".csv";
  std::ofstream out(path);
  out << "k,node";
  for (int d = 0; d < state_dim; ++d) out << ",x" << d;
  out << ",trace_P,sum_nu,qp_iters,consensus_rounds,bytes_gamma_xi,bytes_raw\n";
  char buf[64];
  for (const auto& row : rows) {
    out << row.step << ',' << row.node;
    for (int d = 0; d < state_dim; ++d) {
      std::snprintf(buf, sizeof buf, "%.17g", row.state[d]);
      out << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", row.cov_trace);
    out << ',' << buf;
    std::snprintf(buf, sizeof buf, "%.17g", row.weight_sum);
    out << ',' << buf << ',' << row.qp_iterations << ',' << row.consensus_rounds
        << ',' << row.bytes_info_pair << ',' << row.bytes_raw << '\n';
  }
}

RunOutput execute_run(const ScenarioConfig& config,
                      const std::vector<Eigen::Vector2d>& positions,
                      const ConsensusGraph& graph, const ExperimentOptions& options,
                      int run) {
  const std::uint64_t seed = run_seed(config.seed, run);
  RunOutput out;

  Truth truth = simulate_truth(config, positions, detail::splitmix64(seed ^ 0x74727574ULL));
  out.truth = truth.states;

  const TransitionModel transition = make_transition(config.motion);
  std::vector<MeasurementModel> sensors;
  sensors.reserve(config.sensor_count);
  for (int i = 0; i < config.sensor_count; ++i) {
    sensors.push_back(make_measurement({config.sensor_kind, positions[i],
                                        config.sensor_noise_cov}));
  }

  const std::uint64_t filter_seed = detail::splitmix64(seed ^ 0x6e6f6465ULL);
  DistributedFilter dnf(graph, transition, sensors, config.filter, config.initial_mean,
                        config.initial_cov, filter_seed);
  std::optional<CentralizedFilter> cnf;
  if (options.with_centralized) {
    cnf.emplace(transition, sensors, config.filter, config.initial_mean,
                config.initial_cov, filter_seed);
  }

  // Prediction-only dead reckoning from the same prior, never updated.
  std::optional<WeightedSample> baseline;
  RandomStream baseline_stream(filter_seed);
  if (options.with_baseline) {
    baseline = make_initial_sample(config.initial_mean, config.initial_cov,
                                   config.filter.sample_count,
                                   config.filter.resolved_floor(), baseline_stream);
  }

  const bool tracing = !options.out_dir.empty();
  for (int k = 0; k < config.horizon; ++k) {
    const auto& meas = truth.measurements[k];
    DistributedFilter::StepOutput step = dnf.step(meas);
    out.rounds_sum += step.ledger.rounds;
    out.drift_max = std::max(out.drift_max, step.sample_drift);
    ++out.steps_done;

    std::vector<Vec> node_estimates;
    node_estimates.reserve(step.nodes.size());
    bool finite = true;
    for (const auto& node : step.nodes) {
      node_estimates.push_back(node.state);
      finite = finite && node.state.allFinite();
    }
    out.dnf.push_back(node_estimates);
    if (tracing) {
      auto& rows = out.traces["dnf"];
      for (size_t i = 0; i < step.nodes.size(); ++i) {
        rows.push_back({k, static_cast<int>(i), step.nodes[i].state,
                        step.nodes[i].cov.trace(), step.nodes[i].raw_weight_sum,
                        step.nodes[i].qp_iterations, step.ledger.rounds,
                        step.info_pair_bytes_per_message,
                        step.nodes[i].raw_bytes_per_message});
      }
    }

    if (cnf) {
      CentralizedFilter::StepOutput cstep = cnf->step(meas);
      out.cnf.push_back({cstep.state});
      finite = finite && cstep.state.allFinite();
      if (tracing) {
        out.traces["cnf"].push_back({k, 0, cstep.state, cstep.cov.trace(),
                                     cstep.raw_weight_sum, cstep.qp_iterations, 0, 0, 0});
      }
    }
    if (baseline) {
      *baseline = predict(*baseline, transition, baseline_stream);
      auto [mean, cov] = state_estimate(*baseline);
      out.baseline.push_back({mean});
      if (tracing) {
        out.traces["baseline"].push_back({k, 0, mean, cov.trace(), 1.0, 0, 0, 0, 0});
      }
    }

    if (!finite) {
      out.diverged = true;
      break;
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ScenarioConfig& config,
                                const ExperimentOptions& options) {
  config.validate();
  const std::vector<Eigen::Vector2d> positions = resolve_sensor_positions(config);
  const ConsensusGraph graph = build_graph(config, positions);

  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
  }

  std::vector<RunOutput> runs(config.runs);
  {
    int thread_count = options.threads > 0
                           ? options.threads
                           : static_cast<int>(std::thread::hardware_concurrency());
    thread_count = std::max(1, std::min(thread_count, config.runs));
    std::atomic<int> next{0};
    auto worker = [&] {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= config.runs) return;
        runs[r] = execute_run(config, positions, graph, options, r);
        if (!options.out_dir.empty()) {
          for (const auto& [method, rows] : runs[r].traces) {
            write_trace(options.out_dir, config.name, r, method, rows,
                        config.motion.state_dim());
          }
          runs[r].traces.clear();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < thread_count; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  double rounds_sum = 0.0;
  int steps_total = 0;
  for (int r = 0; r < config.runs; ++r) {
    if (runs[r].diverged) {
      ++result.divergences;
      continue;
    }
    result.truths.push_back(runs[r].truth);
    result.estimates["dnf"].push_back(runs[r].dnf);
    if (options.with_centralized) result.estimates["cnf"].push_back(runs[r].cnf);
    if (options.with_baseline) result.estimates["baseline"].push_back(runs[r].baseline);
    rounds_sum += runs[r].rounds_sum;
    steps_total += runs[r].steps_done;
    result.sample_drift_max = std::max(result.sample_drift_max, runs[r].drift_max);
  }
  result.rounds_mean = steps_total > 0 ? rounds_sum / steps_total : 0.0;
  result.bytes_info_pair_per_message =
      ConsensusLedger::info_pair_message_bytes(config.filter.sample_count);
  SensorModel probe{config.sensor_kind, Eigen::Vector2d::Zero(), config.sensor_noise_cov};
  result.bytes_raw_per_message =
      ConsensusLedger::raw_message_bytes(config.filter.sample_count, probe.dim());

  const std::vector<int> pos_idx{0, 2};
  const std::vector<int> vel_idx{1, 3};
  if (!result.truths.empty()) {
    for (const auto& [method, est] : result.estimates) {
      std::vector<double> per_run;
      result.metrics.methods[method] =
          compute_metrics(result.truths, est, pos_idx, vel_idx, &per_run);
      result.metrics.per_run_aee_pos[method] = std::move(per_run);
    }
  }

  json methods = json::object();
  for (const auto& [name, m] : result.metrics.methods) {
    methods[name] = {{"rmse_pos", m.rmse_pos},
                     {"rmse_vel", m.rmse_vel},
                     {"aee_pos", m.aee_pos},
                     {"aee_vel", m.aee_vel}};
  }
  json sensor_positions = json::array();
  for (const auto& p : positions) sensor_positions.push_back({p[0], p[1]});
  json graph_edges = json::array();
  for (const auto& [a, b] : graph.edges) graph_edges.push_back({a, b});

  result.summary = {
      {"scenario", config.name},
      {"seed", config.seed},
      {"runs", config.runs},
      {"methods", methods},
      {"comm",
       {{"rounds_mean", result.rounds_mean},
        {"bytes_gamma_xi", result.bytes_info_pair_per_message},
        {"bytes_raw", result.bytes_raw_per_message}}},
      {"divergences", result.divergences},
      {"meta",
       {{"aggregation",
         "errors pooled over runs x nodes; RMSE_k/AEE_k averaged over steps"},
        {"sample_drift_max", result.sample_drift_max},
        {"sensor_positions", sensor_positions},
        {"graph_edges", graph_edges}}}};

  if (!options.out_dir.empty()) {
    std::filesystem::path path(options.out_dir);
    path /= config.name + "_summary.json";
    std::ofstream out(path);
    out << result.summary.dump(2) << '\n';
  }
  return result;
}

}  // namespace kmf
