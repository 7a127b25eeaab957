#include "kmf/kernels.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace kmf {

KernelSpec KernelSpec::gaussian(double bandwidth) {
  KernelSpec s;
  s.kind = KernelKind::Gaussian;
  s.bandwidth = bandwidth;
  s.validate();
  return s;
}

KernelSpec KernelSpec::laplace(double bandwidth) {
  KernelSpec s;
  s.kind = KernelKind::Laplace;
  s.bandwidth = bandwidth;
  s.validate();
  return s;
}

KernelSpec KernelSpec::polynomial(double offset, int degree) {
  KernelSpec s;
  s.kind = KernelKind::Polynomial;
  s.offset = offset;
  s.degree = degree;
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  switch (kind) {
    case KernelKind::Gaussian:
    case KernelKind::Laplace:
      if (!(bandwidth > 0.0)) throw ArgumentError("kernel bandwidth must be positive");
      break;
    case KernelKind::Polynomial:
      if (!(offset > 0.0)) throw ArgumentError("polynomial kernel offset must be positive");
      if (degree < 1) throw ArgumentError("polynomial kernel degree must be >= 1");
      break;
  }
}

double eval_kernel(const KernelSpec& spec, const Vec& x, const Vec& y) {
  if (x.size() != y.size()) {
    std::ostringstream os;
    os << "eval_kernel: dimension mismatch (" << x.size() << " vs " << y.size() << ")";
    throw ArgumentError(os.str());
  }
  spec.validate();
  switch (spec.kind) {
    case KernelKind::Gaussian:
      return std::exp(-(x - y).squaredNorm() / spec.bandwidth);
    case KernelKind::Laplace:
      return std::exp(-(x - y).lpNorm<1>() / spec.bandwidth);
    case KernelKind::Polynomial:
      return std::pow(x.dot(y) + spec.offset, spec.degree);
  }
  throw ArgumentError("eval_kernel: unknown kernel kind");
}

GramContext::GramContext(const KernelSpec& spec, Mat points,
                         std::optional<double> sigma_reg)
    : points_(std::move(points)) {
  spec.validate();
  const int m = static_cast<int>(points_.cols());
  if (m < 1) throw ArgumentError("build_gram: need at least one point");
  if (sigma_reg && *sigma_reg < 0.0) {
    throw ArgumentError("build_gram: regularizer must be nonnegative");
  }

  // Fill both triangles from one evaluation per pair so K is exactly symmetric.
  kernel_.resize(m, m);
  for (int i = 0; i < m; ++i) {
    kernel_(i, i) = eval_kernel(spec, points_.col(i), points_.col(i));
    for (int j = i + 1; j < m; ++j) {
      const double v = eval_kernel(spec, points_.col(i), points_.col(j));
      kernel_(i, j) = v;
      kernel_(j, i) = v;
    }
  }

  sigma_reg_ = sigma_reg ? *sigma_reg : 1e-8 * kernel_.trace() / m;

  Mat regularized = kernel_;
  regularized.diagonal().array() += sigma_reg_;
  chol_.compute(regularized);
  if (chol_.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(regularized, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    std::ostringstream os;
    os << "build_gram: K + sigma_reg*I is not positive definite"
       << " (min eigenvalue " << lo << ", max eigenvalue " << hi
       << ", condition estimate " << (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity())
       << ", m = " << m << ", sigma_reg = " << sigma_reg_ << ")";
    throw SingularGramError(os.str());
  }
}

GramContext build_gram(const KernelSpec& spec, const Mat& points,
                       std::optional<double> sigma_reg) {
  return GramContext(spec, points, sigma_reg);
}

}  // namespace kmf
