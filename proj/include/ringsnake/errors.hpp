#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ringsnake {

enum class ErrorCode {
  ConfigError,
  NoThreeRoots,
  InvalidLabel,
  IncompatibleReduction,
  DimensionMismatch,
  SingularJacobian,
  NoConvergence,
  Diverged,
  SeedNotConverged,
  StepCollapse,
  NoSignChange,
  NullVectorNotFound,
  FallbackToOriginalBranch,
  InsufficientSamples,
  DomainError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::NoThreeRoots: return "NoThreeRoots";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::IncompatibleReduction: return "IncompatibleReduction";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::SeedNotConverged: return "SeedNotConverged";
    case ErrorCode::StepCollapse: return "StepCollapse";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::NullVectorNotFound: return "NullVectorNotFound";
    case ErrorCode::FallbackToOriginalBranch: return "FallbackToOriginalBranch";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Configuration errors map to CLI exit code 1, everything else is numeric.
  bool is_config() const noexcept {
    return code_ == ErrorCode::ConfigError || code_ == ErrorCode::InvalidLabel ||
           code_ == ErrorCode::IncompatibleReduction || code_ == ErrorCode::InsufficientSamples ||
           code_ == ErrorCode::DimensionMismatch || code_ == ErrorCode::DomainError;
  }

 private:
  ErrorCode code_;
};

}  // namespace ringsnake
