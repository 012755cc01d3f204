#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kisim {

enum class ErrorCode {
  InvalidArgument,
  TemperatureAboveCritical,
  NoResonanceInRange,
  NotConverged,
  WindowTooLarge,
  DegenerateCloud,
  IllConditioned,
  SingularNormalEquations,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TemperatureAboveCritical: return "TemperatureAboveCritical";
    case ErrorCode::NoResonanceInRange: return "NoResonanceInRange";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::DegenerateCloud: return "DegenerateCloud";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace detail {
inline void require(bool condition, const std::string& message,
                    ErrorCode code = ErrorCode::InvalidArgument) {
  if (!condition) throw Error(code, message);
}
}  // namespace detail

}  // namespace kisim
