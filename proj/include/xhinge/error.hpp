#ifndef XHINGE_ERROR_HPP
#define XHINGE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace xhinge {

enum class ErrorCode {
  OutOfRange,
  DegenerateInput,
  DegenerateObjective,
  NotPositiveDefinite,
  SingularTangent,
  NonConverged,
  EmptyArchive,
  ConfigError,
  InfeasibleStart,
  Io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::OutOfRange: return "OutOfRange";
  case ErrorCode::DegenerateInput: return "DegenerateInput";
  case ErrorCode::DegenerateObjective: return "DegenerateObjective";
  case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
  case ErrorCode::SingularTangent: return "SingularTangent";
  case ErrorCode::NonConverged: return "NonConverged";
  case ErrorCode::EmptyArchive: return "EmptyArchive";
  case ErrorCode::ConfigError: return "ConfigError";
  case ErrorCode::InfeasibleStart: return "InfeasibleStart";
  case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace xhinge

#endif
