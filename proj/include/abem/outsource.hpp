#pragma once

// Outsourced decryption. The receiver blinds its key into a TransformKey
// (handed to an untrusted proxy) and a RetrievalKey (kept). The proxy does
// the pairing-heavy part and returns T = K * e(g,g)^{(w - beta v) s t};
// the receiver removes the blinding with two pairings and checks the
// result with verify_m.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "abem/scheme.hpp"

namespace abem {

struct TransformKey {
  CurveId curve = CurveId::Bls12_381;
  RightElement d;  // g2^{(alpha + r) / beta + v}
  std::vector<KeyComponent> components;  // D_j * g1^w, D'_j unchanged

  policy::AttributeSet attributes() const;
};

struct RetrievalKey {
  CurveId curve = CurveId::Bls12_381;
  RightElement d_r;      // g2^v
  RightElement d_hat_r;  // g2^{w / beta}
};

using CiphertextDigest = std::array<std::uint8_t, 32>;

struct PartialDecryption {
  CurveId curve = CurveId::Bls12_381;
  TargetElement t;
  CiphertextDigest ciphertext_digest;  // SHA-256 of the encoded ciphertext
};

struct TransformKeyPair {
  TransformKey tk;
  RetrievalKey rk;
};

struct GenTkTrace {
  Scalar v;
  Scalar w_over_beta;  // w itself needs beta, which the receiver never has
};

TransformKeyPair gen_tk(const PublicKey& pk, const SecretKey& sk, RandomSource& rng,
                        GenTkTrace* trace = nullptr);

/// nullopt when the key's attributes do not satisfy the ciphertext policy.
/// Deterministic; consumes no randomness.
std::optional<PartialDecryption> transform(const TransformKey& tk, const Ciphertext& ct);
std::optional<PartialDecryption> transform(const PublicKey& pk, const TransformKey& tk,
                                           const Ciphertext& ct);

/// Throws Error with kind EchoMismatch (partial made for another
/// ciphertext), Authentication (payload blob altered) or Verification (the
/// partial does not unwrap the payload, or (M, u) fails verify_m).
std::vector<std::uint8_t> recover(const PublicKey& pk, const RetrievalKey& rk,
                                  const Ciphertext& ct, const PartialDecryption& partial);
Opened recover_opened(const PublicKey& pk, const RetrievalKey& rk, const Ciphertext& ct,
                      const PartialDecryption& partial);

CiphertextDigest ciphertext_digest(const Ciphertext& ct);

}  // namespace abem
