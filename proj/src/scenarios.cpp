#include "kmf/scenarios.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "kmf/dnf.hpp"
#include "kmf/errors.hpp"

namespace kmf {

using nlohmann::json;

void MotionModel::validate() const {
  if (!(dt > 0.0)) throw ConfigError("motion: dt must be positive");
  if (noise_intensity < 0.0) throw ConfigError("motion: noise intensity must be nonnegative");
}

Mat MotionModel::noise_cov() const {
  if (kind == MotionKind::ConstantVelocity) {
    return noise_intensity * Mat::Identity(2, 2);
  }
  Mat q = Mat::Zero(5, 5);
  const double t3 = dt * dt * dt / 3.0;
  const double t2 = dt * dt / 2.0;
  q(0, 0) = t3;
  q(0, 1) = t2;
  q(1, 0) = t2;
  q(1, 1) = dt;
  q(2, 2) = t3;
  q(2, 3) = t2;
  q(3, 2) = t2;
  q(3, 3) = dt;
  q(4, 4) = 1.75e-3 * dt;
  return noise_intensity * q;
}

Vec cv_transition(const Vec& state, const Vec& noise, double dt) {
  if (state.size() != 4 || noise.size() != 2) {
    throw ArgumentError("cv_transition: expects 4-state [x, vx, y, vy] and 2-d noise");
  }
  Vec next(4);
  const double half = 0.5 * dt * dt;
  next[0] = state[0] + dt * state[1] + half * noise[0];
  next[1] = state[1] + dt * noise[0];
  next[2] = state[2] + dt * state[3] + half * noise[1];
  next[3] = state[3] + dt * noise[1];
  return next;
}

Vec ct_transition(const Vec& state, const Vec& noise, double dt) {
  if (state.size() != 5 || noise.size() != 5) {
    throw ArgumentError("ct_transition: expects 5-state [x, vx, y, vy, w] and 5-d noise");
  }
  const double w = state[4];
  double swt_over_w;   // sin(w dt) / w
  double cwtm1_over_w; // (cos(w dt) - 1) / w
  if (std::abs(w) < 1e-8) {
    swt_over_w = dt;
    cwtm1_over_w = 0.0;
  } else {
    swt_over_w = std::sin(w * dt) / w;
    cwtm1_over_w = (std::cos(w * dt) - 1.0) / w;
  }
  const double c = std::cos(w * dt);
  const double s = std::sin(w * dt);
  Vec next(5);
  next[0] = state[0] + swt_over_w * state[1] + cwtm1_over_w * state[3];
  next[1] = c * state[1] - s * state[3];
  next[2] = state[2] - cwtm1_over_w * state[1] + swt_over_w * state[3];
  next[3] = s * state[1] + c * state[3];
  next[4] = w;
  return next + noise;
}

int SensorModel::dim() const {
  switch (kind) {
    case SensorKind::BearingOnly:
      return 1;
    case SensorKind::RangeBearing:
      return 2;
    case SensorKind::RangeBearingRate:
      return 3;
  }
  return 0;
}

void SensorModel::validate() const {
  if (noise_cov.rows() != dim() || noise_cov.cols() != dim()) {
    throw ConfigError("sensor: noise covariance dimension does not match sensor kind");
  }
  require_spd(noise_cov, "sensor noise covariance");
}

Vec measure(const SensorModel& sensor, const Vec& state, const Vec& noise) {
  const double dx = state[0] - sensor.position[0];
  const double dy = state[2] - sensor.position[1];
  const double range = std::hypot(dx, dy);
  if (range == 0.0) {
    throw GeometryError("measure: target coincides with the sensor position");
  }
  Vec out(sensor.dim());
  switch (sensor.kind) {
    case SensorKind::BearingOnly:
      out[0] = std::atan2(dy, dx);
      break;
    case SensorKind::RangeBearing:
      out[0] = range;
      out[1] = std::atan2(dy, dx);
      break;
    case SensorKind::RangeBearingRate:
      out[0] = range;
      out[1] = std::atan2(dy, dx);
      out[2] = (dx * state[1] + dy * state[3]) / range;
      break;
  }
  return out + noise;
}

void ScenarioConfig::validate() const {
  motion.validate();
  if (sensor_count < 1) throw ConfigError("scenario: need at least one sensor");
  if (horizon < 1) throw ConfigError("scenario: horizon must be >= 1");
  if (runs < 1) throw ConfigError("scenario: runs must be >= 1");
  if (initial_mean.size() != motion.state_dim()) {
    throw ConfigError("scenario: initial mean dimension does not match the motion model");
  }
  if (initial_cov.rows() != motion.state_dim() || initial_cov.cols() != motion.state_dim()) {
    throw ConfigError("scenario: initial covariance dimension does not match the motion model");
  }
  SensorModel probe{sensor_kind, Eigen::Vector2d::Zero(), sensor_noise_cov};
  probe.validate();
  if (!sensor_positions.empty() &&
      static_cast<int>(sensor_positions.size()) != sensor_count) {
    throw ConfigError("scenario: explicit sensor positions must match sensor count");
  }
  if (sensor_positions.empty() && !(placement_square_side > 0.0)) {
    throw ConfigError("scenario: need explicit sensor positions or a placement square");
  }
  filter.validate();
}

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ConfigError("scenario field '" + field + "': " + what);
}

template <typename T>
T require(const json& j, const std::string& field) {
  if (!j.contains(field)) field_error(field, "missing");
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    field_error(field, e.what());
  }
}

template <typename T>
T optional_or(const json& j, const std::string& field, T fallback) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    field_error(field, e.what());
  }
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

Mat diag_mat(const std::vector<double>& v) {
  Mat out = Mat::Zero(static_cast<int>(v.size()), static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i), static_cast<int>(i)) = v[i];
  return out;
}

KernelSpec parse_kernel(const json& j) {
  const std::string kind = require<std::string>(j, "kind");
  if (kind == "gaussian") return KernelSpec::gaussian(require<double>(j, "sigma"));
  if (kind == "laplace") return KernelSpec::laplace(require<double>(j, "sigma"));
  if (kind == "polynomial") {
    return KernelSpec::polynomial(require<double>(j, "c"), require<int>(j, "d"));
  }
  field_error("kernel.kind", "expected gaussian, laplace or polynomial");
}

SensorKind parse_sensor_kind(const std::string& kind) {
  if (kind == "bearing_only") return SensorKind::BearingOnly;
  if (kind == "range_bearing") return SensorKind::RangeBearing;
  if (kind == "range_bearing_rate") return SensorKind::RangeBearingRate;
  field_error("sensors.kind", "expected bearing_only, range_bearing or range_bearing_rate");
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario parse error: ") + e.what());
  }

  ScenarioConfig cfg;
  cfg.name = optional_or<std::string>(j, "name", "scenario");

  const json motion = j.contains("motion") ? j.at("motion") : json::object();
  const std::string mkind = require<std::string>(motion, "kind");
  if (mkind == "cv") {
    cfg.motion.kind = MotionKind::ConstantVelocity;
  } else if (mkind == "ct") {
    cfg.motion.kind = MotionKind::CoordinatedTurn;
  } else {
    field_error("motion.kind", "expected cv or ct");
  }
  cfg.motion.dt = require<double>(motion, "dt");
  cfg.motion.noise_intensity = require<double>(motion, "noise_intensity");

  const json sensors = j.contains("sensors") ? j.at("sensors") : json::object();
  cfg.sensor_kind = parse_sensor_kind(require<std::string>(sensors, "kind"));
  cfg.sensor_noise_cov = diag_mat(require<std::vector<double>>(sensors, "noise_cov_diag"));
  if (sensors.contains("positions")) {
    for (const auto& p : sensors.at("positions")) {
      auto xy = p.get<std::vector<double>>();
      if (xy.size() != 2) field_error("sensors.positions", "each position needs [x, y]");
      cfg.sensor_positions.emplace_back(xy[0], xy[1]);
    }
    cfg.sensor_count = static_cast<int>(cfg.sensor_positions.size());
  } else {
    cfg.sensor_count = require<int>(sensors, "count");
    cfg.placement_square_side = require<double>(sensors, "square_side");
  }

  const json graph = j.contains("graph") ? j.at("graph") : json::object();
  const std::string gkind = optional_or<std::string>(graph, "kind", "ring");
  if (gkind == "ring") {
    cfg.graph.kind = GraphSpec::Kind::Ring;
  } else if (gkind == "random_geometric") {
    cfg.graph.kind = GraphSpec::Kind::RandomGeometric;
    cfg.graph.radius = require<double>(graph, "radius");
  } else if (gkind == "edges") {
    cfg.graph.kind = GraphSpec::Kind::Edges;
    for (const auto& e : graph.at("edges")) {
      auto pair = e.get<std::vector<int>>();
      if (pair.size() != 2) field_error("graph.edges", "each edge needs [i, j]");
      cfg.graph.edges.emplace_back(pair[0], pair[1]);
    }
  } else {
    field_error("graph.kind", "expected ring, random_geometric or edges");
  }

  const json init = j.contains("init") ? j.at("init") : json::object();
  cfg.initial_mean = to_vec(require<std::vector<double>>(init, "mean"));
  cfg.initial_cov = diag_mat(require<std::vector<double>>(init, "cov_diag"));

  const json filter = j.contains("filter") ? j.at("filter") : json::object();
  cfg.filter.sample_count = require<int>(filter, "samples");
  cfg.filter.kernel = parse_kernel(filter.contains("kernel") ? filter.at("kernel")
                                                             : json::object());
  cfg.filter.weight_floor = optional_or<double>(filter, "epsilon", 0.0);
  cfg.filter.gram_regularizer = optional_or<double>(filter, "sigma_reg", -1.0);
  if (filter.contains("consensus")) {
    const json c = filter.at("consensus");
    cfg.filter.consensus.max_rounds = optional_or<int>(c, "max_rounds", 500);
    cfg.filter.consensus.tol = optional_or<double>(c, "tol", 1e-10);
  }
  if (filter.contains("resample")) {
    const json rs = filter.at("resample");
    const std::string policy = optional_or<std::string>(rs, "policy", "every_step");
    if (policy == "every_step") {
      cfg.filter.resample = ResamplePolicy::every_step();
    } else if (policy == "ess") {
      cfg.filter.resample =
          ResamplePolicy::ess_threshold(optional_or<double>(rs, "threshold", 0.5));
    } else {
      field_error("filter.resample.policy", "expected every_step or ess");
    }
  }

  cfg.horizon = require<int>(j, "horizon");
  cfg.runs = optional_or<int>(j, "runs", 1);
  cfg.seed = optional_or<std::uint64_t>(j, "seed", 0);

  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::vector<Eigen::Vector2d> resolve_sensor_positions(const ScenarioConfig& config) {
  if (!config.sensor_positions.empty()) return config.sensor_positions;
  RandomStream stream = RandomStream(config.seed).child(0x706c6163ULL);  // placement
  std::vector<Eigen::Vector2d> out;
  out.reserve(config.sensor_count);
  const double side = config.placement_square_side;
  for (int i = 0; i < config.sensor_count; ++i) {
    const double x = (stream.uniform() - 0.5) * side;
    const double y = (stream.uniform() - 0.5) * side;
    out.emplace_back(x, y);
  }
  return out;
}

ConsensusGraph build_graph(const ScenarioConfig& config,
                           const std::vector<Eigen::Vector2d>& positions) {
  const int n = config.sensor_count;
  switch (config.graph.kind) {
    case GraphSpec::Kind::Ring:
      return ConsensusGraph::ring(n);
    case GraphSpec::Kind::Edges:
      return ConsensusGraph::from_edges(n, config.graph.edges);
    case GraphSpec::Kind::RandomGeometric:
      break;
  }

  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((positions[i] - positions[j]).norm() <= config.graph.radius) {
        edges.emplace_back(i, j);
      }
    }
  }
  ConsensusGraph g = ConsensusGraph::from_edges(n, std::move(edges));
  // Keep adding the shortest link between components until connected.
  while (!g.connected()) {
    auto comps = g.components();
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> link{-1, -1};
    for (int a : comps[0]) {
      for (size_t c = 1; c < comps.size(); ++c) {
        for (int b : comps[c]) {
          const double d = (positions[a] - positions[b]).norm();
          if (d < best) {
            best = d;
            link = {a, b};
          }
        }
      }
    }
    g.edges.push_back({std::min(link.first, link.second),
                       std::max(link.first, link.second)});
  }
  return g;
}

TransitionModel make_transition(const MotionModel& motion) {
  motion.validate();
  TransitionModel t;
  t.state_dim = motion.state_dim();
  t.noise_dim = motion.noise_dim();
  t.noise_factor = psd_factor(motion.noise_cov());
  const double dt = motion.dt;
  if (motion.kind == MotionKind::ConstantVelocity) {
    t.apply = [dt](const Vec& x, const Vec& w) { return cv_transition(x, w, dt); };
  } else {
    t.apply = [dt](const Vec& x, const Vec& w) { return ct_transition(x, w, dt); };
  }
  return t;
}

MeasurementModel make_measurement(const SensorModel& sensor) {
  sensor.validate();
  MeasurementModel m;
  m.dim = sensor.dim();
  m.noise_cov = sensor.noise_cov;
  const SensorModel s = sensor;
  const Vec zero = Vec::Zero(sensor.dim());
  m.observe = [s, zero](const Vec& x) { return measure(s, x, zero); };
  return m;
}

Truth simulate_truth(const ScenarioConfig& config,
                     const std::vector<Eigen::Vector2d>& positions, std::uint64_t seed) {
  RandomStream stream(seed);
  const TransitionModel transition = make_transition(config.motion);

  std::vector<SensorModel> sensors;
  sensors.reserve(config.sensor_count);
  for (int i = 0; i < config.sensor_count; ++i) {
    sensors.push_back({config.sensor_kind, positions[i], config.sensor_noise_cov});
  }
  const Mat meas_factor = psd_factor(config.sensor_noise_cov);

  Truth truth;
  const Mat init_factor = psd_factor(config.initial_cov);
  Vec state = config.initial_mean +
              init_factor * stream.gauss_vec(static_cast<int>(config.initial_mean.size()));
  for (int k = 0; k < config.horizon; ++k) {
    const Vec noise = transition.noise_factor * stream.gauss_vec(transition.noise_dim);
    state = transition.apply(state, noise);
    truth.states.push_back(state);
    std::vector<Vec> row;
    row.reserve(sensors.size());
    for (const auto& sensor : sensors) {
      const Vec v = meas_factor * stream.gauss_vec(sensor.dim());
      row.push_back(measure(sensor, state, v));
    }
    truth.measurements.push_back(std::move(row));
  }
  return truth;
}

}  // namespace kmf
