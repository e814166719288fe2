#pragma once

#include <stdexcept>
#include <string>

namespace sbmri {

// Bad user-supplied configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse: out-of-range index, shape mismatch, empty batch.
class UsageError : public std::logic_error {
public:
    explicit UsageError(const std::string& msg) : std::logic_error(msg) {}
};

// Non-finite value encountered mid-computation (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or version-mismatched artifact file.
class FileFormatError : public std::runtime_error {
public:
    explicit FileFormatError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace sbmri
