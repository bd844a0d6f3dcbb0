#pragma once
#include <stdexcept>
#include <string>

namespace mfl {

// Error taxonomy mirrored by the CLI exit codes: config 2, cap 3, numerical 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct CapError : std::runtime_error {
    explicit CapError(const std::string& m) : std::runtime_error(m) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& m) : std::runtime_error(m) {}
};

} // namespace mfl
