#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dset {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatch, invalid parameters, bad config.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A quadratic program (or polyhedral set) with an empty feasible region.
/// `certificate` holds the final inconsistent active set, indices into the
/// stacked [equalities; inequalities] constraint list.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, std::vector<int> certificate)
      : Error(what), certificate(std::move(certificate)) {}
  std::vector<int> certificate;
};

/// An iterative method hit its iteration cap.
class NonconvergenceError : public Error {
 public:
  using Error::Error;
};

/// The MM objective went up; almost always a gradient or projection bug.
class MmViolationError : public Error {
 public:
  using Error::Error;
};

class InitializationError : public Error {
 public:
  using Error::Error;
};

/// Raised by tilting calibration: budget unreachable, refused, or the
/// importance weights degenerated.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Importance weights too concentrated for a trustworthy estimate.
class WeightDegeneracyError : public CalibrationError {
 public:
  using CalibrationError::CalibrationError;
};

}  // namespace dset
