#pragma once

#include <stdexcept>
#include <string>

namespace csid {

// Invalid configuration or dimension mismatch between inputs. CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerically degenerate problem (singular moment sum, coincident clusters,
// singular Gram matrix). CLI exit code 2.
class DegeneracyError : public std::runtime_error {
public:
    explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failures. CLI exit code 3.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace csid
