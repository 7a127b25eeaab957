#include "kmf/metrics.hpp"

#include <cmath>

#include "kmf/errors.hpp"

namespace kmf {

namespace {

double sub_norm(const Vec& err, const std::vector<int>& idx) {
  double acc = 0.0;
  for (int i : idx) acc += err[i] * err[i];
  return std::sqrt(acc);
}

}  // namespace

MethodMetrics compute_metrics(const std::vector<std::vector<Vec>>& truth,
                              const std::vector<std::vector<std::vector<Vec>>>& estimates,
                              const std::vector<int>& pos_idx,
                              const std::vector<int>& vel_idx,
                              std::vector<double>* per_run_aee_pos) {
  const size_t runs = truth.size();
  if (runs == 0 || estimates.size() != runs) {
    throw ArgumentError("compute_metrics: run counts differ");
  }
  const size_t steps = truth[0].size();
  for (size_t r = 0; r < runs; ++r) {
    if (truth[r].size() != steps || estimates[r].size() != steps) {
      throw ArgumentError("compute_metrics: trajectory lengths differ");
    }
  }

  if (per_run_aee_pos) per_run_aee_pos->assign(runs, 0.0);

  MethodMetrics out;
  for (size_t k = 0; k < steps; ++k) {
    double sq_pos = 0.0, sq_vel = 0.0, abs_pos = 0.0, abs_vel = 0.0;
    size_t count = 0;
    for (size_t r = 0; r < runs; ++r) {
      for (const Vec& est : estimates[r][k]) {
        const Vec err = est - truth[r][k];
        const double p = sub_norm(err, pos_idx);
        const double v = sub_norm(err, vel_idx);
        sq_pos += p * p;
        sq_vel += v * v;
        abs_pos += p;
        abs_vel += v;
        ++count;
        if (per_run_aee_pos) {
          (*per_run_aee_pos)[r] +=
              p / (static_cast<double>(steps) * estimates[r][k].size());
        }
      }
    }
    if (count == 0) throw ArgumentError("compute_metrics: empty estimate set");
    const double inv = 1.0 / static_cast<double>(count);
    const double rmse_pos_k = std::sqrt(sq_pos * inv);
    const double rmse_vel_k = std::sqrt(sq_vel * inv);
    const double aee_pos_k = abs_pos * inv;
    const double aee_vel_k = abs_vel * inv;
    if (aee_pos_k > rmse_pos_k + 1e-12 || aee_vel_k > rmse_vel_k + 1e-12) {
      throw NumericalError("compute_metrics: AEE exceeded RMSE, aggregation is broken");
    }
    out.rmse_pos += rmse_pos_k;
    out.rmse_vel += rmse_vel_k;
    out.aee_pos += aee_pos_k;
    out.aee_vel += aee_vel_k;
  }
  const double inv_steps = 1.0 / static_cast<double>(steps);
  out.rmse_pos *= inv_steps;
  out.rmse_vel *= inv_steps;
  out.aee_pos *= inv_steps;
  out.aee_vel *= inv_steps;
  return out;
}

}  // namespace kmf
