#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kinopt {

/// Base class for every failure raised by the toolkit. `kind()` is a stable
/// machine-readable tag used by the CLI error record.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message) : Error("InvalidArgument", message) {}
};

/// An agent left [-1, 1] during an unclamped microscopic step.
class BoundViolation : public Error {
 public:
  BoundViolation(std::size_t agent, double value)
      : Error("BoundViolation", "agent " + std::to_string(agent) + " left [-1,1] with value " +
                                    std::to_string(value) +
                                    " (time step or penalization outside the stable regime)"),
        agent_(agent),
        value_(value) {}

  std::size_t agent() const noexcept { return agent_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t agent_;
  double value_;
};

class BracketFailure : public Error {
 public:
  explicit BracketFailure(const std::string& message) : Error("BracketFailure", message) {}
};

class PairingError : public Error {
 public:
  explicit PairingError(const std::string& message) : Error("PairingError", message) {}
};

class ConditionUnmet : public Error {
 public:
  explicit ConditionUnmet(const std::string& message) : Error("ConditionUnmet", message) {}
};

class ClosureUnavailable : public Error {
 public:
  explicit ClosureUnavailable(const std::string& message) : Error("ClosureUnavailable", message) {}
};

class QuadratureFailure : public Error {
 public:
  explicit QuadratureFailure(const std::string& message) : Error("QuadratureFailure", message) {}
};

/// Configuration diagnostics. `field` is a dotted path ("control.nu"); `line`
/// is 1-based or 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::size_t line, const std::string& message)
      : Error("ConfigError", format(field, line, message)), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, std::size_t line, const std::string& message) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += field + ": ";
    return out + message;
  }

  std::string field_;
  std::size_t line_;
};

}  // namespace kinopt
