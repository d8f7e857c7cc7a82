#ifndef CHVI_ERRORS_HPP
#define CHVI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace chvi {

/// Bad argument to a numerical kernel (non-finite input, eps <= 0, shape mismatch).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Initial data violating the [-1,1] constraint.
class ConstraintViolation : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Newton failed on every level of the dt-halving ladder.
class StepFailure : public std::runtime_error {
public:
  StepFailure(const std::string &what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

private:
  double last_residual_;
};

/// Config text rejected; line is 1-based, 0 when the problem is not tied to a line.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string &what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

private:
  int line_;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Checkpoint rejected: bad magic, truncation, or mismatch with the config.
class CheckpointError : public IoError {
public:
  using IoError::IoError;
};

} // namespace chvi

#endif // CHVI_ERRORS_HPP
