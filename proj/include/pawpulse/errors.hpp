#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pawpulse {

/// Base of every error thrown by the library. Catch this at the CLI boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input validation.
class RangeError : public Error { public: using Error::Error; };
class OrderError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };

// Stream / window preconditions.
class EmptyStream : public Error { public: using Error::Error; };
class EmptyWindow : public Error { public: using Error::Error; };
class DivisionGuard : public Error { public: using Error::Error; };

// Calibration fitting.
class InsufficientData : public Error { public: using Error::Error; };
class DegenerateFit : public Error { public: using Error::Error; };

// Emotion assessment.
class MissingVitals : public Error { public: using Error::Error; };

// Session persistence.
class SeqError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };
class EmptySession : public Error { public: using Error::Error; };

/// Malformed text input. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace pawpulse
