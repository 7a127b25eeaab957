#pragma once

#include "kmf/types.hpp"

namespace kmf {

struct QpResult {
  Vec solution;
  int iterations = 0;
  double kkt_residual = 0.0;
};

/// Minimizes (x - target)^T K (x - target) subject to sum(x) = 1 and
/// x_l >= lower_bound, for symmetric positive definite K.
///
/// Primal active set over the lower bounds, warm-started from the clipped
/// and renormalized target. Throws ConfigError when lower_bound * m >= 1
/// (infeasible) and NumericalError if the iteration fails to terminate.
QpResult min_quadratic_on_simplex(const Mat& K, const Vec& target, double lower_bound);

/// Independent KKT residual of a candidate solution: the largest violation
/// among primal feasibility, stationarity, dual feasibility and
/// complementary slackness.
double simplex_qp_kkt_residual(const Mat& K, const Vec& target, const Vec& x,
                               double lower_bound);

}  // namespace kmf
