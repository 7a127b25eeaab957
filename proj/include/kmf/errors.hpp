#pragma once

#include <stdexcept>
#include <string>

namespace kmf {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad argument shapes or values (dimension mismatches and the like).
struct ArgumentError : Error {
  using Error::Error;
};

/// Gram matrix plus regularizer is not numerically positive definite.
struct SingularGramError : Error {
  using Error::Error;
};

/// Graph is not connected; message lists the components.
struct ConnectivityError : Error {
  using Error::Error;
};

/// A covariance that must be symmetric positive definite is not.
struct CovarianceError : Error {
  using Error::Error;
};

/// Invalid configuration (scenario file fields, infeasible constraints).
struct ConfigError : Error {
  using Error::Error;
};

/// Degenerate geometry, e.g. measuring a target at zero range.
struct GeometryError : Error {
  using Error::Error;
};

/// Unexpected failure of a linear solve.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace kmf
