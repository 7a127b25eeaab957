#include "kmf/simplex_qp.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/LU>

#include "kmf/errors.hpp"

namespace kmf {

namespace {

constexpr double kFeasTol = 1e-12;
constexpr double kDualTol = 1e-10;

// Equality-constrained subproblem with the bounded set fixed at the lower
// bound: solve for the free coordinates and the equality multiplier.
//   [K_FF  -1] [x_F    ]   [(K t)_F - lb * K_FB 1]
//   [1^T    0] [lambda ] = [1 - lb * |B|         ]
void solve_subproblem(const Mat& K, const Vec& target, double lb,
                      const std::vector<int>& free_idx,
                      const std::vector<int>& bound_idx, Vec* x_free,
                      double* lambda) {
  const int f = static_cast<int>(free_idx.size());
  Mat kkt = Mat::Zero(f + 1, f + 1);
  Vec rhs(f + 1);
  const Vec kt = K * target;
  for (int r = 0; r < f; ++r) {
    for (int c = 0; c < f; ++c) kkt(r, c) = K(free_idx[r], free_idx[c]);
    kkt(r, f) = -1.0;
    kkt(f, r) = 1.0;
    double cross = 0.0;
    for (int b : bound_idx) cross += K(free_idx[r], b);
    rhs[r] = kt[free_idx[r]] - lb * cross;
  }
  rhs[f] = 1.0 - lb * static_cast<double>(bound_idx.size());
  Vec sol = kkt.partialPivLu().solve(rhs);
  *x_free = sol.head(f);
  *lambda = sol[f];
}

}  // namespace

QpResult min_quadratic_on_simplex(const Mat& K, const Vec& target, double lb) {
  const int m = static_cast<int>(target.size());
  if (K.rows() != m || K.cols() != m) {
    throw ArgumentError("simplex qp: K and target sizes differ");
  }
  if (lb * m >= 1.0) {
    std::ostringstream os;
    os << "simplex qp: infeasible bounds, lower_bound * m = " << lb * m << " >= 1";
    throw ConfigError(os.str());
  }

  // Warm start: clip the target to the bound and spread the remaining mass
  // proportionally, which is feasible by construction.
  const double budget = 1.0 - lb * m;
  Vec x(m);
  {
    Vec shifted = (target.array() - lb).max(0.0);
    const double s = shifted.sum();
    if (s > 0.0) {
      x = (lb + (budget / s) * shifted.array()).matrix();
    } else {
      x = Vec::Constant(m, lb + budget / m);
    }
  }

  std::vector<char> at_bound(m);
  for (int l = 0; l < m; ++l) at_bound[l] = x[l] <= lb + kFeasTol;

  const int max_iters = 10 * m + 50;
  int iter = 0;
  for (; iter < max_iters; ++iter) {
    std::vector<int> free_idx, bound_idx;
    for (int l = 0; l < m; ++l) (at_bound[l] ? bound_idx : free_idx).push_back(l);
    if (free_idx.empty()) break;

    Vec x_sub;
    double lambda = 0.0;
    solve_subproblem(K, target, lb, free_idx, bound_idx, &x_sub, &lambda);

    const bool sub_feasible = x_sub.minCoeff() >= lb - kFeasTol;
    if (sub_feasible) {
      for (size_t r = 0; r < free_idx.size(); ++r) x[free_idx[r]] = x_sub[r];
      // Bound multipliers from stationarity; release the worst violator.
      const Vec grad = K * (x - target);
      int worst = -1;
      double worst_mu = -kDualTol;
      for (int b : bound_idx) {
        const double mu = grad[b] - lambda;
        if (mu < worst_mu) {
          worst_mu = mu;
          worst = b;
        }
      }
      if (worst < 0) break;  // KKT satisfied
      at_bound[worst] = false;
      continue;
    }

    // Partial step toward the subproblem solution; first blocking bound
    // joins the working set.
    double alpha = 1.0;
    int blocker = -1;
    for (size_t r = 0; r < free_idx.size(); ++r) {
      const int l = free_idx[r];
      if (x_sub[r] < lb && x[l] > x_sub[r]) {
        const double a = (x[l] - lb) / (x[l] - x_sub[r]);
        if (a < alpha) {
          alpha = a;
          blocker = l;
        }
      }
    }
    for (size_t r = 0; r < free_idx.size(); ++r) {
      const int l = free_idx[r];
      x[l] += alpha * (x_sub[r] - x[l]);
    }
    if (blocker >= 0) {
      x[blocker] = lb;
      at_bound[blocker] = true;
    }
  }
  if (iter >= max_iters) {
    throw NumericalError("simplex qp: active-set iteration did not terminate");
  }

  QpResult res;
  res.solution = std::move(x);
  res.iterations = iter + 1;
  res.kkt_residual = simplex_qp_kkt_residual(K, target, res.solution, lb);
  return res;
}

double simplex_qp_kkt_residual(const Mat& K, const Vec& target, const Vec& x,
                               double lb) {
  const int m = static_cast<int>(x.size());
  const Vec grad = 2.0 * K * (x - target);
  const double scale = std::max(1.0, grad.cwiseAbs().maxCoeff());

  double residual = std::abs(x.sum() - 1.0);
  residual = std::max(residual, (lb - x.array()).maxCoeff());

  // Classify coordinates by distance to the bound, recover the equality
  // multiplier from the free set, then score stationarity, dual feasibility
  // and complementarity.
  std::vector<int> free_idx;
  for (int l = 0; l < m; ++l) {
    if (x[l] > lb + 1e-9 * std::max(1.0, std::abs(x[l]))) free_idx.push_back(l);
  }
  double lambda = 0.0;
  if (!free_idx.empty()) {
    for (int l : free_idx) lambda += grad[l];
    lambda /= static_cast<double>(free_idx.size());
  }
  for (int l = 0; l < m; ++l) {
    const double mu = grad[l] - lambda;
    if (x[l] > lb + 1e-9 * std::max(1.0, std::abs(x[l]))) {
      residual = std::max(residual, std::abs(mu) / scale);
    } else {
      residual = std::max(residual, -mu / scale);
      residual = std::max(residual, std::abs(mu * (x[l] - lb)) / scale);
    }
  }
  return residual;
}

}  // namespace kmf
