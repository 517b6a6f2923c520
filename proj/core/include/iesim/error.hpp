#pragma once

#include <stdexcept>
#include <string>

namespace iesim {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model could not be constructed (bad references, cyclic priorities, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

// An input value is outside its allowed range.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, std::string value, std::string allowed);

  const std::string& field() const noexcept { return field_; }
  const std::string& value() const noexcept { return value_; }
  const std::string& allowed() const noexcept { return allowed_; }

 private:
  std::string field_;
  std::string value_;
  std::string allowed_;
};

class EnergyError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

// Raised when a run reaches a state where no step can ever fire.
class DeadlockError : public Error {
 public:
  DeadlockError(double time, std::string snapshot);

  double time() const noexcept { return time_; }
  const std::string& snapshot() const noexcept { return snapshot_; }

 private:
  double time_;
  std::string snapshot_;
};

}  // namespace iesim
