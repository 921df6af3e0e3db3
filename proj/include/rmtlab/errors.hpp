#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rmtlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition on user-supplied parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A caller handed in data that breaks an operation's input contract
/// (non-unit vector, stale fixed-point solution, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, long iterations, double last_residual)
      : Error(what + " (iterations=" + std::to_string(iterations) +
              ", residual=" + std::to_string(last_residual) + ")"),
        iterations_(iterations),
        last_residual_(last_residual) {}

  long iterations() const noexcept { return iterations_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  long iterations_;
  double last_residual_;
};

class SamplingError : public Error {
 public:
  SamplingError(const std::string& what, long attempts)
      : Error(what + " (attempts=" + std::to_string(attempts) + ")"), attempts_(attempts) {}

  long attempts() const noexcept { return attempts_; }

 private:
  long attempts_;
};

/// Two eigenvalues came closer than an operation tolerates.
class CollisionError : public Error {
 public:
  CollisionError(const std::string& what, long first, long second, double gap, long step = -1)
      : Error(what + " (pair=" + std::to_string(first) + "," + std::to_string(second) +
              ", gap=" + std::to_string(gap) + (step >= 0 ? ", step=" + std::to_string(step) : "") +
              ")"),
        first_(first),
        second_(second),
        gap_(gap),
        step_(step) {}

  long first() const noexcept { return first_; }
  long second() const noexcept { return second_; }
  double gap() const noexcept { return gap_; }
  long step() const noexcept { return step_; }

 private:
  long first_;
  long second_;
  double gap_;
  long step_;
};

class StepSizeError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// Experiment configuration rejected by schema validation.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace rmtlab
