#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace manhattan {

// Two error families, matching the CLI exit codes: NumericError -> 3,
// InvariantError -> 4. Bad arguments / config / file problems -> UsageError -> 2.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : NumericError {
  using NumericError::NumericError;
};

struct OrbitEscapedError : NumericError {
  using NumericError::NumericError;
};

struct DerivativeVanishedError : NumericError {
  using NumericError::NumericError;
};

struct ContinuationError : NumericError {
  ContinuationError(const std::string& msg, long long seed, std::complex<double> at)
      : NumericError(msg), seed_index(seed), parameter(at) {}
  long long seed_index;
  std::complex<double> parameter;
};

struct CollisionError : NumericError {
  using NumericError::NumericError;
};

struct BracketError : NumericError {
  using NumericError::NumericError;
};

struct InsufficientDataError : NumericError {
  using NumericError::NumericError;
};

struct CapExceededError : UsageError {
  using UsageError::UsageError;
};

}  // namespace manhattan
