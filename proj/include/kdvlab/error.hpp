#pragma once

#include <stdexcept>
#include <string>

namespace kdvlab {

/// A time integrator or nonlinear solve failed (blow-up, non-convergence, CFL).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent study configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kdvlab
