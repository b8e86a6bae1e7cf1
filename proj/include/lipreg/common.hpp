#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace lipreg {

// Error taxonomy used across the library. The CLI maps these to exit codes
// (config/input -> 2, capacity -> 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested degree is beyond the numerically trustworthy range of a basis.
class DegradationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Seed = std::uint64_t;

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InputError(msg);
}

}  // namespace lipreg
