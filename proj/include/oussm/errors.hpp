#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace oussm {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something outside the documented domain: wrong shapes,
// non-finite entries, malformed files.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown that is a property of the numbers, not the caller.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Mean-reversion matrix has an eigenvalue with nonpositive real part.
class NoStationaryState : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Eigenvalues too close to separate into real blocks.
class DegenerateSpectrum : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FilterDivergence : public NumericalError {
 public:
  FilterDivergence(std::size_t step, const std::string& what)
      : NumericalError("filter diverged at step " + std::to_string(step) +
                       ": " + what),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class EstimationFailed : public NumericalError {
 public:
  EstimationFailed(const std::string& what, std::vector<std::string> starts)
      : NumericalError(what), per_start_(std::move(starts)) {}
  const std::vector<std::string>& per_start() const noexcept {
    return per_start_;
  }

 private:
  std::vector<std::string> per_start_;
};

}  // namespace oussm
