#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fgal {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

/// Bad user-supplied configuration or scenario parameters (CLI exit 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure detected at run time (CLI exit 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Picard residuals stopped contracting.
struct NonContractionError : NumericalError {
  using NumericalError::NumericalError;
};

/// Iteration budget exhausted before the residual tolerance was met.
struct MaxIterationsError : NumericalError {
  using NumericalError::NumericalError;
};

/// Filesystem failure while reading or writing artifacts (CLI exit 4).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fgal
