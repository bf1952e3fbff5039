#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shockgp {

enum class ErrorKind {
  DegenerateFront,
  NoDensityJump,
  InsufficientData,
  NonPSD,
  OptimFailed,
  StabilityViolation,
  EmptyRegime,
  NoPlateaus,
  DegenerateTimes,
  MisalignedSegments,
  MalformedInput,
  SchemaMismatch,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported through this one type; callers switch on
// kind() rather than catching a hierarchy.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateFront: return "DegenerateFront";
    case ErrorKind::NoDensityJump: return "NoDensityJump";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::NonPSD: return "NonPSD";
    case ErrorKind::OptimFailed: return "OptimFailed";
    case ErrorKind::StabilityViolation: return "StabilityViolation";
    case ErrorKind::EmptyRegime: return "EmptyRegime";
    case ErrorKind::NoPlateaus: return "NoPlateaus";
    case ErrorKind::DegenerateTimes: return "DegenerateTimes";
    case ErrorKind::MisalignedSegments: return "MisalignedSegments";
    case ErrorKind::MalformedInput: return "MalformedInput";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace shockgp
