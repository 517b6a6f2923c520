#include "iesim/error.hpp"

#include <fmt/format.h>

namespace iesim {

ValidationError::ValidationError(std::string field, std::string value, std::string allowed)
    : Error(fmt::format("invalid {}: '{}' (allowed: {})", field, value, allowed)),
      field_(std::move(field)),
      value_(std::move(value)),
      allowed_(std::move(allowed)) {}

DeadlockError::DeadlockError(double time, std::string snapshot)
    : Error(fmt::format("deadlock at t={:.6f}s: no step can fire before the horizon", time)),
      time_(time),
      snapshot_(std::move(snapshot)) {}

}  // namespace iesim
