#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ftct/linalg.hpp"

namespace ftct {

enum class ErrorKind {
  InvalidVector,
  NormNotSmoothAtZero,
  StrongConvexityViolated,
  InvalidNorm,
  ChartExit,
  IntegrationFailure,
  BvpNoConvergence,
  DegenerateFlag,
  ProfileVanishes,
  RhoNotUnique,
  DegenerateWaist,
  TruncationTooShort,
  NoComparisonTriangle,
  Unsupported,
  PreconditionFailed,
  LimitNotResolved,
  HypothesisFailed,
  Inconclusive,
  NotApplicable,
  ConfigError,
  IoError,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidVector: return "InvalidVector";
    case ErrorKind::NormNotSmoothAtZero: return "NormNotSmoothAtZero";
    case ErrorKind::StrongConvexityViolated: return "StrongConvexityViolated";
    case ErrorKind::InvalidNorm: return "InvalidNorm";
    case ErrorKind::ChartExit: return "ChartExit";
    case ErrorKind::IntegrationFailure: return "IntegrationFailure";
    case ErrorKind::BvpNoConvergence: return "BvpNoConvergence";
    case ErrorKind::DegenerateFlag: return "DegenerateFlag";
    case ErrorKind::ProfileVanishes: return "ProfileVanishes";
    case ErrorKind::RhoNotUnique: return "RhoNotUnique";
    case ErrorKind::DegenerateWaist: return "DegenerateWaist";
    case ErrorKind::TruncationTooShort: return "TruncationTooShort";
    case ErrorKind::NoComparisonTriangle: return "NoComparisonTriangle";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::LimitNotResolved: return "LimitNotResolved";
    case ErrorKind::HypothesisFailed: return "HypothesisFailed";
    case ErrorKind::Inconclusive: return "Inconclusive";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when an integrated curve leaves the chart domain.
class ChartExitError : public Error {
 public:
  ChartExitError(const Vec2& position, const std::string& what)
      : Error(ErrorKind::ChartExit, what), position_(position) {}
  const Vec2& position() const noexcept { return position_; }

 private:
  Vec2 position_;
};

class HypothesisFailedError : public Error {
 public:
  explicit HypothesisFailedError(std::vector<std::string> failures)
      : Error(ErrorKind::HypothesisFailed, join(failures)), failures_(std::move(failures)) {}
  const std::vector<std::string>& failures() const noexcept { return failures_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& f : v) {
      if (!s.empty()) s += "; ";
      s += f;
    }
    return s;
  }
  std::vector<std::string> failures_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace ftct
