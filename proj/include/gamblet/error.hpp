#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gamblet {

enum class ErrorCode {
  NotSPD,
  DimensionMismatch,
  NoConvergence,
  InvalidProbability,
  UnsupportedDim,
  EmptyPointSet,
  ShapeMismatch,
  TooLarge,
  BadLevel,
  EmptyGrid,
  NoBracket,
  LevelZero,
  TooFewLevels,
  Disconnected,
  IndexOutOfRange,
  InvalidArgument,
  InvariantViolation,
  InvalidConfig,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSPD: return "NotSPD";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::UnsupportedDim: return "UnsupportedDim";
    case ErrorCode::EmptyPointSet: return "EmptyPointSet";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::BadLevel: return "BadLevel";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::LevelZero: return "LevelZero";
    case ErrorCode::TooFewLevels: return "TooFewLevels";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

inline void require_same(long long a, long long b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace detail
}  // namespace gamblet
