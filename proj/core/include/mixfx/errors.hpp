#pragma once

#include <stdexcept>
#include <string>

namespace mixfx {

// Config/schema violations. `pointer` is a JSON pointer into the offending
// document ("" when the error is not tied to a field).
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string pointer, const std::string& what)
      : std::runtime_error(pointer.empty() ? what : pointer + ": " + what),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

private:
  std::string pointer_;
};

// Numerical blow-up or invalid state during path simulation.
class SimulationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Statistics unusable for inference (V = 0 with U != 0, all subjects degenerate, ...).
class DegenerateStatsError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Estimator-level failures (too few subjects, solver cannot proceed, ...).
class EstimationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invariant broken inside the library itself; always a bug, never user input.
class InternalError : public std::logic_error {
  using std::logic_error::logic_error;
};

} // namespace mixfx
