#pragma once

#include <stdexcept>
#include <string>

namespace mfoe {

// Invalid configuration, schema violation, or constraint failure detected at
// construction/load time. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numeric failure during iteration (non-finite objective/gradient, failed
// power iteration, ...). Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
  public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mfoe
