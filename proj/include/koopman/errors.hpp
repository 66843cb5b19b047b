#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace koopman {

/// Dimension mismatches and invalid arguments caught before any numerics run.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation produced a non-finite value (NaN or infinity).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A basis-change matrix failed the invertibility check.
class TransformError : public std::invalid_argument {
 public:
  TransformError(const std::string& what, double rcond)
      : std::invalid_argument(what), rcond_(rcond) {}

  /// Reciprocal condition estimate (sigma_min / sigma_max) of the offending matrix.
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// Malformed input file; line() is 1-based and 0 when no line applies.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Data cannot support the requested computation (e.g. zero norm where a
/// normalization is required).
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The coefficient vector maps to a numerically zero function on the data.
class DegenerateFunctionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input exceeds a size guard on an O(N^2)-memory code path.
class SizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Trajectory rollout produced a non-finite state.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::size_t trajectory, std::size_t step)
      : std::runtime_error(what + " (trajectory " + std::to_string(trajectory) +
                           ", step " + std::to_string(step) + ")"),
        trajectory_(trajectory),
        step_(step) {}

  std::size_t trajectory() const noexcept { return trajectory_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t trajectory_;
  std::size_t step_;
};

}  // namespace koopman
