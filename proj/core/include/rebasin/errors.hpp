#pragma once

#include <stdexcept>
#include <string>

namespace rebasin {

struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidInputError : std::runtime_error {
    explicit InvalidInputError(const std::string& msg) : std::runtime_error(msg) {}
};

// IDX parsing and checkpoint container problems.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Implicit-mode Sinkhorn gradient requested on an unconverged forward pass.
struct NonConvergenceError : std::runtime_error {
    NonConvergenceError(const std::string& msg, double residual)
        : std::runtime_error(msg), residual(residual) {}
    double residual;
};

}  // namespace rebasin
