#pragma once

#include <stdexcept>
#include <string>

namespace spinsim {

// Invalid or inconsistent configuration (unknown key, unit violation, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller misuse of an operation (unsorted input, empty grid, bad tag).
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Not enough data to form the requested estimate.
struct StatisticsError : std::runtime_error {
  explicit StatisticsError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem failures on result output.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Least-squares fit failed to converge; carries the residual norm.
struct FitError : std::runtime_error {
  FitError(const std::string& msg, double residual_norm)
      : std::runtime_error(msg), residual_norm(residual_norm) {}
  double residual_norm;
};

}  // namespace spinsim
