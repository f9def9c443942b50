#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace occuthresh {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was not met.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// d*n != k*m: the configuration family is empty.
class EmptyFamilyError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Exact enumeration requested beyond the configured variable cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A function returned a non-finite value at `point`.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, double point) : Error(what), point_(point) {}
  double point() const noexcept { return point_; }

 private:
  double point_;
};

/// Root finder called on an interval without a sign change.
class BracketingError : public Error {
 public:
  using Error::Error;
};

class RetryLimitError : public Error {
 public:
  RetryLimitError(const std::string& what, std::uint64_t attempts)
      : Error(what), attempts_(attempts) {}
  std::uint64_t attempts() const noexcept { return attempts_; }

 private:
  std::uint64_t attempts_;
};

/// Malformed input document. `position` names where parsing stopped
/// (a byte offset or a field path such as "wiring[5]").
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string position)
      : Error(what + " at " + position), position_(std::move(position)) {}
  const std::string& position() const noexcept { return position_; }

 private:
  std::string position_;
};

/// One of the numerical certificate checks did not hold.
class CertificateFailure : public Error {
 public:
  CertificateFailure(std::string check, double witness, const std::string& detail)
      : Error("certificate check '" + check + "' failed at w1=" + std::to_string(witness) +
              ": " + detail),
        check_(std::move(check)),
        witness_(witness) {}
  const std::string& check() const noexcept { return check_; }
  double witness() const noexcept { return witness_; }

 private:
  std::string check_;
  double witness_;
};

}  // namespace occuthresh
