#pragma once

#include <stdexcept>
#include <string>

namespace pmslow {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of an operation (e.g. a jump point
/// outside (0,1), k = 0 where a positive jump count is required).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A state does not satisfy the precondition of an operation, typically
/// membership in a piecewise subcritical space.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Two jump points of a plateau function fall into the same grid cell.
class JumpCollisionError : public Error {
 public:
  using Error::Error;
};

/// A plateau system was evaluated at a vanishing gap.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A monitored structural property of the flow was observed to fail.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Integration produced a non-finite state or could not make progress.
class NumericalAbort : public Error {
 public:
  NumericalAbort(const std::string& what, double last_stable_time)
      : Error(what + " (last stable time " + std::to_string(last_stable_time) + ")"),
        last_stable_time_(last_stable_time) {}

  double last_stable_time() const noexcept { return last_stable_time_; }

 private:
  double last_stable_time_;
};

/// Invalid run configuration. `field` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace pmslow
