#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kmf/consensus.hpp"
#include "kmf/filter_model.hpp"
#include "kmf/random.hpp"
#include "kmf/types.hpp"

namespace kmf {

enum class MotionKind { ConstantVelocity, CoordinatedTurn };

/// Planar motion model. ConstantVelocity uses state [x, vx, y, vy] with a
/// two-dimensional acceleration-like noise shaped through [dt^2/2, dt]^T per
/// axis. CoordinatedTurn uses [x, vx, y, vy, turn_rate] with additive
/// five-dimensional noise; the turn rate follows a random walk.
struct MotionModel {
  MotionKind kind = MotionKind::ConstantVelocity;
  double dt = 1.0;
  double noise_intensity = 0.0;  // q

  int state_dim() const { return kind == MotionKind::ConstantVelocity ? 4 : 5; }
  int noise_dim() const { return kind == MotionKind::ConstantVelocity ? 2 : 5; }
  /// Covariance of the raw noise vector fed to the transition.
  Mat noise_cov() const;
  void validate() const;
};

Vec cv_transition(const Vec& state, const Vec& noise, double dt);
Vec ct_transition(const Vec& state, const Vec& noise, double dt);

enum class SensorKind { BearingOnly, RangeBearing, RangeBearingRate };

struct SensorModel {
  SensorKind kind = SensorKind::BearingOnly;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Mat noise_cov;

  int dim() const;
  void validate() const;
};

/// Noiseless h(x) plus additive noise. Bearings use the two-argument
/// arctangent so the value covers the full circle (-pi, pi].
Vec measure(const SensorModel& sensor, const Vec& state, const Vec& noise);

struct GraphSpec {
  enum class Kind { Ring, RandomGeometric, Edges } kind = Kind::Ring;
  double radius = 0.0;  // RandomGeometric
  std::vector<std::pair<int, int>> edges;
};

struct ScenarioConfig {
  std::string name;
  MotionModel motion;
  SensorKind sensor_kind = SensorKind::BearingOnly;
  int sensor_count = 0;
  double placement_square_side = 0.0;          // 0 when positions are explicit
  std::vector<Eigen::Vector2d> sensor_positions;  // empty -> sampled from seed
  Mat sensor_noise_cov;
  GraphSpec graph;
  Vec initial_mean;
  Mat initial_cov;
  FilterConfig filter;
  int horizon = 1;
  int runs = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& json_text);

/// Sensor positions for the scenario: the explicit list when given,
/// otherwise uniform draws in the configured square from the scenario seed.
std::vector<Eigen::Vector2d> resolve_sensor_positions(const ScenarioConfig& config);

/// Communication graph over the resolved positions. A random-geometric
/// graph that comes out disconnected is augmented with the shortest
/// inter-component links until it satisfies the connectivity assumption.
ConsensusGraph build_graph(const ScenarioConfig& config,
                           const std::vector<Eigen::Vector2d>& positions);

TransitionModel make_transition(const MotionModel& motion);
MeasurementModel make_measurement(const SensorModel& sensor);

struct Truth {
  std::vector<Vec> states;                      // [step]
  std::vector<std::vector<Vec>> measurements;   // [step][node]
};

/// Ground truth and noisy measurements, deterministic in the seed.
Truth simulate_truth(const ScenarioConfig& config,
                     const std::vector<Eigen::Vector2d>& positions, std::uint64_t seed);

}  // namespace kmf
