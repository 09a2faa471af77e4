#pragma once

#include <stdexcept>
#include <string>

namespace mia {

inline constexpr const char* kToolkitVersion = "0.3.0";

/// Error families surfaced by the toolkit. The CLI maps each one onto a
/// fixed process exit code (see exit_code()).
enum class ErrorKind {
  Validation,  // bad flag or configuration value
  Parse,       // malformed or unreadable input file
  Capacity,    // not enough records to satisfy a request
  Domain,      // argument outside a function's mathematical domain
  Range,       // value outside a tabulated range (no extrapolation)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::Validation, what) {}
};

class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what)
      : Error(ErrorKind::Capacity, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::Domain, what) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what)
      : Error(ErrorKind::Range, what) {}
};

/// Distinguishes the ways an input file can be rejected.
enum class ParseErrorKind {
  MissingFile,
  VersionMismatch,
  DimensionMismatch,
  UnknownLabel,
  Malformed,
};

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind detail, const std::string& what,
             std::size_t line = 0)
      : Error(ErrorKind::Parse, what), detail_(detail), line_(line) {}

  ParseErrorKind detail() const noexcept { return detail_; }
  /// 1-based line number of the offending record, 0 when not line-bound.
  std::size_t line() const noexcept { return line_; }

 private:
  ParseErrorKind detail_;
  std::size_t line_;
};

/// Process exit code: 2 validation, 3 parse, 4 capacity, 5 numeric/range.
constexpr int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Validation:
      return 2;
    case ErrorKind::Parse:
      return 3;
    case ErrorKind::Capacity:
      return 4;
    case ErrorKind::Domain:
    case ErrorKind::Range:
      return 5;
  }
  return 1;
}

}  // namespace mia
