#pragma once

#include <stdexcept>
#include <string>

namespace spce {

/// Invalid experiment configuration (CLI flags, config files, model specs).
/// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input data (event logs, CSV columns).
/// The CLI maps this to exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spce
