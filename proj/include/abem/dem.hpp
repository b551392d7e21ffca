#pragma once

// Payload encapsulation keyed by a target-group element.
//
// Blob layout: nonce (12) || key commitment (32) || AES-256-GCM ciphertext
// of (message || u) || tag (16). HKDF-SHA256 over the canonical encoding of
// K, info "ABEM/KDF", yields the AES key and the commitment. The commitment
// tells a wrong K apart from a tampered blob.

#include <cstdint>
#include <span>
#include <vector>

#include "abem/bilinear.hpp"

namespace abem::dem {

inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kCommitSize = 32;
inline constexpr std::size_t kTagSize = 16;
inline constexpr std::size_t kOverhead = kNonceSize + kCommitSize + kTagSize;

std::vector<std::uint8_t> seal(const TargetElement& key,
                               std::span<const std::uint8_t> associated_data,
                               std::span<const std::uint8_t> message,
                               const LeftElement& witness, RandomSource& rng);

enum class OpenStatus {
  Ok,
  WrongKey,  // commitment mismatch: K does not belong to this blob
  Forged,    // right key, but the blob or associated data was altered
};

struct OpenResult {
  OpenStatus status = OpenStatus::Forged;
  std::vector<std::uint8_t> message;
  LeftElement witness;
};

OpenResult open(const TargetElement& key, std::span<const std::uint8_t> associated_data,
                std::span<const std::uint8_t> blob);

}  // namespace abem::dem
