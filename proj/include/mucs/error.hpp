#ifndef MUCS_ERROR_HPP
#define MUCS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mucs {

/// Invalid argument or parameter outside the model's domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Quadrature non-convergence, non-finite intermediate values, degenerate maps.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// AMP produced a non-finite state.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, int iteration, double last_finite_mse)
      : NumericalError(what), iteration_(iteration), last_finite_mse_(last_finite_mse) {}

  int iteration() const noexcept { return iteration_; }
  /// NaN when no ground truth was supplied.
  double last_finite_mse() const noexcept { return last_finite_mse_; }

 private:
  int iteration_;
  double last_finite_mse_;
};

/// Instance dimensions are inconsistent or exceed the memory budget.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed instance file: bad magic, version, truncation or checksum.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

/// Transition search bracket has the same classification at both ends, or the
/// classification is not monotone inside it.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mucs

#endif
