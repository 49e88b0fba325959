#pragma once

#include <stdexcept>
#include <string>

namespace photopair {

// Dipole or angular-momentum selection rule violated.
class SelectionRuleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Photon energy outside the window of the requested transition channel.
class ChannelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Degenerate geometry, e.g. a cross product with a parallel reference axis.
class SingularGeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Quadrature or iteration failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nothing to integrate: every channel is energetically closed.
class EmptyResultError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BasisSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration parse/validation failure. `line` is 0 when no single line is at fault.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Wraps a failure inside one pipeline stage of a scan.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace photopair
