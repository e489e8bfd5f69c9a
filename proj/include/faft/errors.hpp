#pragma once

#include <stdexcept>
#include <string>

namespace faft {

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad inputs: malformed configs, CSV defects, invalid tuning fractions.
/// CLI maps these to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failures encountered on structurally valid inputs.
/// CLI maps these to exit code 2.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Sample too short for the requested split fractions (m0 or l_j collapse).
class DegenerateSplit : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A variance formula evaluated to a non-positive value (e.g. mu0 = 0.5).
class DegenerateTuning : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Squared forecast errors are (numerically) constant.
class DegenerateVariance : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Regressor cross-product matrix has condition number >= 1e12.
class IllConditioned : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Requested factor count exceeds the informative directions in the panel.
class RankDeficient : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Eigenvalue matrix in the rotation formula is numerically singular.
class SingularEigenvalues : public NumericError {
 public:
  using NumericError::NumericError;
};

/// CSV ingestion: a cell failed to parse as a number.
class NonNumericColumn : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// CSV ingestion: an empty or NA cell.
class MissingValues : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Series too short for the requested split.
class TooShortSeries : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace faft
