#pragma once

#include <stdexcept>
#include <string>

namespace magvox {

enum class ErrorKind {
  Input,         // missing or empty input
  Parse,         // malformed CSV / G-code / config text
  Config,        // invalid machine or material parameters
  Validation,    // design violates a structural rule or travel limit
  Verification,  // program does not match the machine it is executed on
  Domain,        // mathematical precondition (degenerate vector, singular point)
  Convergence,   // iterative solver gave up
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Config: return "config";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Verification: return "verification";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Convergence: return "convergence";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_{kind} {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Error tied to a 1-based line of a text input.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + msg), line_{line} {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace magvox
