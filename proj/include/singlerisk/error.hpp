#pragma once

#include <stdexcept>
#include <string>

namespace singlerisk {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed or unusable input data (parsing, empty sets, missing risks).
class DataError : public Error {
 public:
  using Error::Error;
};

// A fit could not be produced from otherwise valid data.
class EstimationError : public Error {
 public:
  using Error::Error;
};

class NumericError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

class ConvergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

class RankDeficiencyError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// The data carry no information about the quantity requested
// (single covariate stratum, strata without events, empty trimmed set).
class IdentificationError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

class TooManyFailuresError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

}  // namespace singlerisk
