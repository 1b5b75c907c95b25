#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace mourre {

using cplx = std::complex<double>;
using Vec = std::vector<cplx>;
using RVec = std::vector<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Configuration or precondition violation (bad grids, unknown profiles, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-convergence, singular shift, lost precision.
struct NumericsError : std::runtime_error {
  explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

/// A regularization parameter fell below what the truncated model resolves.
struct ResolutionError : std::runtime_error {
  explicit ResolutionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mourre
