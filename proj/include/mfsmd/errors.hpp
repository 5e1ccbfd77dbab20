#pragma once

#include <stdexcept>
#include <string>

namespace mfsmd {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Wrong evaluator mode for the requested operation.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Mirror map or Hessian evaluated where it is undefined (p < 2, eps = 0).
class SingularPoint : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Bad, unknown or missing configuration entry.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double diagnostic)
      : std::runtime_error(what), diagnostic_(diagnostic) {}
  explicit NumericalFailure(const std::string& what)
      : NumericalFailure(what, 0.0) {}

  /// Residual or condition estimate attached by the failing routine.
  double diagnostic() const noexcept { return diagnostic_; }

 private:
  double diagnostic_;
};

}  // namespace mfsmd
