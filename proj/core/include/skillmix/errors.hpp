#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace skillmix {

/// Base of every error raised by the library. The CLI maps subclasses onto
/// exit codes, so new errors should derive from the closest category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input/contract violations (exit code 1 at the CLI).
class PreconditionError : public Error {
 public:
  using Error::Error;
};
class ValidationError : public Error {
 public:
  using Error::Error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};
class ExhaustedError : public DomainError {
 public:
  using DomainError::DomainError;
};
class EmptyError : public DomainError {
 public:
  using DomainError::DomainError;
};
class TemplateError : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  SchemaError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  /// 1-based line of the offending record, 0 when not line oriented.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class CoverageError : public Error {
 public:
  CoverageError(const std::string& what, std::vector<std::string> orphans)
      : Error(what), orphans_(std::move(orphans)) {}
  const std::vector<std::string>& orphans() const noexcept { return orphans_; }

 private:
  std::vector<std::string> orphans_;
};

// Provider failures (exit code 2 at the CLI).
class ProviderError : public Error {
 public:
  using Error::Error;
};
class AuthError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};
class MalformedResponse : public ProviderError {
 public:
  using ProviderError::ProviderError;
};
/// Retryable: HTTP 429 or an equivalent provider signal.
class RateLimited : public ProviderError {
 public:
  using ProviderError::ProviderError;
};
/// Retryable: connection failures and 5xx responses.
class TransientError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/// One example could not be completed; the surrounding run continues.
class Abandoned : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

}  // namespace skillmix
