#pragma once

#include <stdexcept>
#include <string>

namespace ost {

// Invalid argument values; CLI exit code 2.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DimensionError : ParameterError {
  using ParameterError::ParameterError;
};

struct DomainError : ParameterError {
  using ParameterError::ParameterError;
};

// Malformed or inconsistent files; CLI exit code 3.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProvenanceError : FormatError {
  using FormatError::FormatError;
};

// CFL violations, singular systems, empty results; CLI exit code 4.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ost
