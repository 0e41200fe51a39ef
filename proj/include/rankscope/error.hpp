#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rankscope {

enum class ErrorCode {
  BadIndex,
  BadShape,
  KindMismatch,
  InvalidFamily,
  NotConstructible,
  BadCongruence,
  DomainError,
  Unsupported,
  Precondition,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadIndex: return "BadIndex";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::InvalidFamily: return "InvalidFamily";
    case ErrorCode::NotConstructible: return "NotConstructible";
    case ErrorCode::BadCongruence: return "BadCongruence";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::Precondition: return "Precondition";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every library failure carries one of the codes above; the CLI maps them
/// onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace rankscope
