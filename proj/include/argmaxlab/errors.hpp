#pragma once

#include <stdexcept>
#include <string>

namespace argmaxlab {

// Raised when a covariance kernel turns out not to be a valid covariance
// (PSD violation beyond tolerance, Cholesky failure after jitter).
struct KernelInvalidError : std::runtime_error {
    explicit KernelInvalidError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an experiment configuration fails validation, including the
// up-front hypothesis checks (monotonicity, diagonal anchor covariance).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a conditioning anchor is numerically degenerate
// (vanishing pivot in the residual-kernel recursion).
struct DegenerateAnchorError : std::runtime_error {
    explicit DegenerateAnchorError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace argmaxlab
