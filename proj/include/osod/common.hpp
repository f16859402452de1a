#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace osod {

inline constexpr const char* kVersion = "0.1.0";
// Bumped whenever a serialized artifact layout changes.
inline constexpr const char* kFormatVersion = "osod-report-v1";

using image_id_t = std::int64_t;

// I/O, parse and schema problems. CLI maps these to exit code 2.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid values or parameters in otherwise well-formed input. Exit code 2.
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A split request that cannot be satisfied by the available pool.
class capacity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A metric is undefined or an internal invariant failed. Exit code 1.
class metric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace osod
