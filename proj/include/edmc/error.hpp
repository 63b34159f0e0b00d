#pragma once

#include <stdexcept>
#include <string>

namespace edmc {

enum class ErrorKind {
  InvalidDimension,
  InvalidArgument,
  NumericalFailure,
  RankDeficientRetraction,
  LineSearchFailure,
  DegenerateReference,
  EmptySample,
  Parse,
  Io,
};

inline const char* to_string(ErrorKind kind);

/// Library-wide exception. The kind lets callers (the CLI in particular) map
/// failures onto stable exit codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "InvalidDimension";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::RankDeficientRetraction: return "RankDeficientRetraction";
    case ErrorKind::LineSearchFailure: return "LineSearchFailure";
    case ErrorKind::DegenerateReference: return "DegenerateReference";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Io: return "IoError";
  }
  return "Unknown";
}

}  // namespace edmc
