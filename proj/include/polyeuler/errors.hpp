#pragma once

#include <stdexcept>
#include <string>

namespace polyeuler {

/// Raised when the step-size-dependent drift is not defined at the requested
/// grid resolution (taming radius <= 2, so the blend bands would overlap 0).
class SchemeUndefinedError : public std::runtime_error {
 public:
  explicit SchemeUndefinedError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised for malformed problem configs and unusable run parameters.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace polyeuler
