#pragma once

#include <stdexcept>
#include <string>

namespace rogue {

// Input violates a documented precondition (CLI exit code 2).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values appeared during time stepping (CLI exit code 3).
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double time, const std::string& what)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

// Measurement cannot be carried out on the given detections (CLI exit code 4).
class MeasurementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoRogueWavesError : public MeasurementError {
 public:
  NoRogueWavesError() : MeasurementError("no rogue waves detected") {}
};

class DegenerateGeometryError : public MeasurementError {
 public:
  using MeasurementError::MeasurementError;
};

class InfeasibleWindowError : public MeasurementError {
 public:
  using MeasurementError::MeasurementError;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rogue
