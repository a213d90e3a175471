#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace srmc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when a transition kernel or history update encounters a
/// non-recoverable numerical fault (non-finite score, NaN state). The
/// driver aborts the owning chain and flushes a diagnostic record.
class KernelFault : public std::runtime_error {
 public:
  explicit KernelFault(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration errors: invalid specs, dimension mismatches, unsupported
/// mode combinations.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace srmc
