#pragma once

#include <stdexcept>
#include <string>

namespace metags {

// Error classes map one-to-one onto CLI exit codes and the machine-parsable
// class token printed on stderr.
enum class ErrorClass {
  Usage = 2,
  Io = 3,
  Schema = 4,
  Validation = 5,
  Infeasible = 6,
  Numeric = 7,
  Internal = 1,
};

inline const char* error_class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::Usage: return "USAGE";
    case ErrorClass::Io: return "IO";
    case ErrorClass::Schema: return "SCHEMA";
    case ErrorClass::Validation: return "VALIDATION";
    case ErrorClass::Infeasible: return "INFEASIBLE";
    case ErrorClass::Numeric: return "NUMERIC";
    case ErrorClass::Internal: return "INTERNAL";
  }
  return "INTERNAL";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& msg)
      : std::runtime_error(msg), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }

 private:
  ErrorClass cls_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(ErrorClass::Io, msg) {}
};

// Malformed file contents: bad JSON, wrong field types, bad magic/version.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(ErrorClass::Schema, msg) {}
};

// Structurally well-formed input violating a domain invariant
// (dangling ids, duplicate links, empty relation class, ...).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg)
      : Error(ErrorClass::Validation, msg) {}
};

// Query pair disconnected within the path-length budget; the sample is
// skipped and reported rather than aborting a whole run.
class NoPathError : public Error {
 public:
  explicit NoPathError(const std::string& msg)
      : Error(ErrorClass::Infeasible, msg) {}
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& msg)
      : Error(ErrorClass::Infeasible, msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg)
      : Error(ErrorClass::Usage, msg) {}
};

// Non-finite value produced by a tensor op, non-finite training loss, ...
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg)
      : Error(ErrorClass::Numeric, msg) {}
};

}  // namespace metags
