#include "abem/errors.hpp"

namespace abem {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Usage: return "usage error";
    case ErrorKind::Decode: return "decode error";
    case ErrorKind::Unsatisfied: return "policy not satisfied";
    case ErrorKind::Authentication: return "authentication failure";
    case ErrorKind::Verification: return "verification failure";
    case ErrorKind::EchoMismatch: return "ciphertext echo mismatch";
    case ErrorKind::Network: return "network error";
    case ErrorKind::Randomness: return "randomness failure";
    case ErrorKind::Internal: return "internal error";
  }
  return "unknown error";
}

const char* to_string(DecodeFailure failure) noexcept {
  switch (failure) {
    case DecodeFailure::BadMagic: return "bad magic";
    case DecodeFailure::UnsupportedVersion: return "unsupported version";
    case DecodeFailure::TagMismatch: return "tag mismatch";
    case DecodeFailure::CurveMismatch: return "curve mismatch";
    case DecodeFailure::Truncated: return "truncated";
    case DecodeFailure::InvalidElement: return "invalid group element";
    case DecodeFailure::Malformed: return "malformed";
  }
  return "unknown";
}

}  // namespace abem
