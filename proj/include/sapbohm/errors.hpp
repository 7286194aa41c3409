#pragma once

#include <stdexcept>
#include <string>

namespace sapbohm {

// Every failure the library reports derives from Error. The CLI maps each
// category onto its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class PreparationError : public Error {
 public:
  using Error::Error;
};

class PropagationError : public Error {
 public:
  PropagationError(const std::string& what, long long step_index = -1)
      : Error(what), step_index_(step_index) {}
  long long step_index() const noexcept { return step_index_; }

 private:
  long long step_index_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Raised when a Bohmian trajectory cannot be advanced: it left the grid, it
// entered a region below the density floor, or the adaptive step underflowed.
class TrajectoryError : public Error {
 public:
  TrajectoryError(const std::string& what, std::size_t trajectory, double time)
      : Error(what), trajectory_(trajectory), time_(time) {}
  std::size_t trajectory() const noexcept { return trajectory_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t trajectory_;
  double time_;
};

class StiffnessError : public TrajectoryError {
 public:
  using TrajectoryError::TrajectoryError;
};

class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace sapbohm
