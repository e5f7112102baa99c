#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nsk {

enum class ErrorKind {
  InvalidGrid,
  ShapeMismatch,
  InvalidParams,
  InvalidCutoff,
  SupportViolation,
  VacuumApproach,
  DensityWindow,
  NonFinite,
  AmplitudeTooLarge,
  Blowup,
  StabilityGuard,
  InsufficientWindow,
  QuadratureFailure,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it to a message and exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nsk
