#pragma once

#include <optional>

#include <Eigen/Cholesky>

#include "kmf/errors.hpp"
#include "kmf/types.hpp"

namespace kmf {

enum class KernelKind { Gaussian, Laplace, Polynomial };

/// Kernel family and parameters. Gaussian and Laplace use the bandwidth,
/// the polynomial kernel uses offset and degree:
///   gaussian:   k(x, x') = exp(-|x - x'|^2   / bandwidth)
///   laplace:    k(x, x') = exp(-|x - x'|_1   / bandwidth)
///   polynomial: k(x, x') = (<x, x'> + offset)^degree
struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  double bandwidth = 1.0;
  double offset = 1.0;
  int degree = 2;

  static KernelSpec gaussian(double bandwidth);
  static KernelSpec laplace(double bandwidth);
  static KernelSpec polynomial(double offset, int degree);

  void validate() const;
};

double eval_kernel(const KernelSpec& spec, const Vec& x, const Vec& y);

/// Gram matrix over a point set together with a Cholesky factorization of
/// K + sigma_reg*I. Immutable after construction and safe to share across
/// threads read-only.
class GramContext {
 public:
  /// points: one column per point. sigma_reg: explicit regularizer, or
  /// nullopt for the default 1e-8 * trace(K) / m.
  GramContext(const KernelSpec& spec, Mat points,
              std::optional<double> sigma_reg = std::nullopt);

  const Mat& kernel_matrix() const { return kernel_; }
  const Mat& points() const { return points_; }
  double regularizer() const { return sigma_reg_; }
  int size() const { return static_cast<int>(kernel_.rows()); }

  /// Solves (K + sigma_reg*I) z = b.
  Vec solve(const Vec& b) const { return chol_.solve(b); }
  Mat solve(const Mat& b) const { return chol_.solve(b); }

 private:
  Mat points_;
  Mat kernel_;
  double sigma_reg_ = 0.0;
  Eigen::LLT<Mat> chol_;
};

GramContext build_gram(const KernelSpec& spec, const Mat& points,
                       std::optional<double> sigma_reg = std::nullopt);

}  // namespace kmf
