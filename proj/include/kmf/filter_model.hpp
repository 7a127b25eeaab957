#pragma once

#include <functional>
#include <optional>

#include "kmf/consensus.hpp"
#include "kmf/kernels.hpp"
#include "kmf/types.hpp"

namespace kmf {

/// State transition x' = f(x, noise). noise_factor maps i.i.d. standard
/// normal draws to process noise with the model's covariance.
struct TransitionModel {
  int state_dim = 0;
  int noise_dim = 0;
  Mat noise_factor;  // state noise = noise_factor * z, z ~ N(0, I)
  std::function<Vec(const Vec&, const Vec&)> apply;
};

/// Sensor: noiseless measurement function and SPD noise covariance.
struct MeasurementModel {
  int dim = 0;
  Mat noise_cov;
  std::function<Vec(const Vec&)> observe;
};

struct ResamplePolicy {
  enum class Mode { EveryStep, EssThreshold };
  Mode mode = Mode::EveryStep;
  /// EssThreshold: resample when 1 / sum(w^2) < ess_fraction * m.
  double ess_fraction = 0.5;

  static ResamplePolicy every_step() { return {}; }
  static ResamplePolicy ess_threshold(double fraction) {
    return {Mode::EssThreshold, fraction};
  }
};

struct FilterConfig {
  int sample_count = 50;
  double weight_floor = 0.0;     // <= 0 selects the default 1e-6 / m
  double gram_regularizer = -1;  // < 0 selects the default 1e-8 tr(K) / m
  KernelSpec kernel;
  ConsensusStop consensus;
  ResamplePolicy resample;

  double resolved_floor() const {
    return weight_floor > 0.0 ? weight_floor : 1e-6 / sample_count;
  }
  std::optional<double> gram_reg() const {
    if (gram_regularizer < 0.0) return std::nullopt;
    return gram_regularizer;
  }
  void validate() const;
};

}  // namespace kmf
