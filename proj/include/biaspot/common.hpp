#pragma once

#include <stdexcept>
#include <string>

namespace biaspot {

inline constexpr const char* kVersion = "biaspot 0.1.0";

// Thrown when a computation leaves the representable range despite
// stabilization (overflow in partition functions, non-finite potentials).
// Argument errors use std::invalid_argument.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

enum class RunStatus { ok, diverged };

inline const char* to_string(RunStatus s) {
  return s == RunStatus::ok ? "ok" : "diverged";
}

}  // namespace biaspot
