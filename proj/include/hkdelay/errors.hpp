#pragma once

#include <stdexcept>
#include <string>

namespace hkdelay {

// Input outside the mathematical domain of an operation (negative distance,
// non-finite coordinate, mismatched sizes).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid model / integrator / history configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = -1)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, double time)
      : std::runtime_error(what + " at t=" + std::to_string(time)), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

// A precondition of a proof-constant computation is violated (e.g. m <= 0).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Shrinkage certificates are only defined for the classical and the
// normalized-without-self weights.
class UnsupportedCertificate : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hkdelay
