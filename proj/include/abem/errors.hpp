#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace abem {

/// Outcome classes surfaced by the library. The CLI maps each one to a
/// distinct exit code.
enum class ErrorKind {
  Usage,           // bad arguments, invalid policy text, bad attribute
  Decode,          // malformed or mismatched serialized object
  Unsatisfied,     // attribute set does not satisfy the access tree
  Authentication,  // payload blob failed to authenticate
  Verification,    // recovered (M, u) does not match C0, or the proxy cheated
  EchoMismatch,    // partial decryption belongs to a different ciphertext
  Network,         // proxy transport failure
  Randomness,      // entropy source failure
  Internal,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

enum class DecodeFailure {
  BadMagic,
  UnsupportedVersion,
  TagMismatch,
  CurveMismatch,
  Truncated,
  InvalidElement,
  Malformed,  // length or structure violation not covered above
};

const char* to_string(DecodeFailure failure) noexcept;

class DecodeError : public Error {
 public:
  DecodeError(DecodeFailure failure, const std::string& what)
      : Error(ErrorKind::Decode, std::string(to_string(failure)) + ": " + what),
        failure_(failure) {}

  DecodeFailure failure() const noexcept { return failure_; }

 private:
  DecodeFailure failure_;
};

/// Policy text rejected by the parser. Line and column are 1-based.
class PolicyError : public Error {
 public:
  PolicyError(const std::string& what, std::size_t line, std::size_t column)
      : Error(ErrorKind::Usage, "policy:" + std::to_string(line) + ":" +
                                    std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace abem
