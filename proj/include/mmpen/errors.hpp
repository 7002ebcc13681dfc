#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mmpen {

/// Malformed user input: bad files, missing columns, invalid labels. CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values (tolerances, penalty parameters, grid sizes).
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

/// Non-finite argument passed to a loss or penalty.
class DomainError : public InputError {
 public:
  using InputError::InputError;
};

/// Iteration budget exhausted. Carries the last iterate and the objective trace.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate,
                   std::vector<double> trace)
      : std::runtime_error(what),
        last_iterate_(std::move(last_iterate)),
        trace_(std::move(trace)) {}

  const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  Eigen::VectorXd last_iterate_;
  std::vector<double> trace_;
};

/// A mathematical guarantee was violated (e.g. MM descent). Always a bug.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mmpen
