#pragma once

// Ciphertext-policy ABE with cached Encryption Machines.
//
// An EncryptionMachine holds the shared access tree for one policy. Each
// em_encrypt re-randomizes it: every share is shifted by a fresh delta and
// every exponent is scaled by a fresh nonzero t, so the root secret of the
// emitted ciphertext is (s_i + delta) * t.
//
// The pairing layer blinds a random target-group payload key K; the message
// and the verification witness u travel in an AES-256-GCM blob keyed from K
// (see dem.hpp). C0 = (g^q)^(x * H_m(M)) with u = g1^x binds (M, u) so the
// receiver can check the result of an untrusted transformation.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abem/bilinear.hpp"
#include "abem/policy.hpp"

namespace abem {

struct PublicKey {
  CurveId curve = CurveId::Bls12_381;
  MirroredElement g;
  LeftElement h;  // g1^beta
  TargetElement egg_alpha;
  MirroredElement gq;
};

struct MasterKey {
  CurveId curve = CurveId::Bls12_381;
  Scalar beta;
  RightElement g_alpha;
  Scalar q;
};

/// D_j = g1^r * H_a(j)^{r_j}, D'_j = g2^{r_j}.
struct KeyComponent {
  std::string attribute;
  LeftElement d;
  RightElement d_prime;
};

/// Components sorted by attribute, one per distinct attribute.
struct SecretKey {
  CurveId curve = CurveId::Bls12_381;
  RightElement d;  // g2^{(alpha + r) / beta}
  std::vector<KeyComponent> components;

  policy::AttributeSet attributes() const;
  const KeyComponent* find(std::string_view attribute) const;
};

struct EmLeaf {
  RightElement c;         // g2^{q_y(0)}
  LeftElement c_prime;    // H_a(att(y))^{q_y(0)}
  LeftElement attribute;  // H_a(att(y))
};

struct EncryptionMachine {
  CurveId curve = CurveId::Bls12_381;
  policy::PolicyAst tree;
  Scalar root_secret;
  std::vector<EmLeaf> leaves;  // preorder leaf order
};

struct LeafComponents {
  RightElement c;       // g2^{q_y(0) t'}
  LeftElement c_prime;  // H_a(att(y))^{q_y(0) t'}
};

struct Ciphertext {
  CurveId curve = CurveId::Bls12_381;
  policy::PolicyAst tree;
  TargetElement c_tilde;  // K * e(g,g)^{alpha s t}
  LeftElement c0;         // u^{H_m(M) q}
  LeftElement c1;         // h^{s t}
  std::vector<LeafComponents> leaves;
  std::vector<std::uint8_t> dem;
};

/// Decrypted payload together with the witness u it was sealed with.
struct Opened {
  std::vector<std::uint8_t> message;
  LeftElement witness;
};

struct KeyPair {
  PublicKey pk;
  MasterKey mk;
};

// Secret randomness exposed for white-box tests. Never populated unless
// the caller passes a trace pointer.
struct SetupTrace {
  Scalar alpha, beta, q;
};
struct KeygenTrace {
  Scalar r;
  std::vector<Scalar> r_j;  // in component order
};
struct BuildTrace {
  policy::SharedTree sharing;
};
struct EncryptTrace {
  Scalar x, t, delta;
  TargetElement payload_key;
};

KeyPair setup(RandomSource& rng, CurveId curve = CurveId::Bls12_381,
              SetupTrace* trace = nullptr);

/// Throws Error(Usage) on an empty or malformed attribute set.
SecretKey keygen(const PublicKey& pk, const MasterKey& mk,
                 std::span<const std::string> attributes, RandomSource& rng,
                 KeygenTrace* trace = nullptr);

EncryptionMachine build_em(const PublicKey& pk, const policy::PolicyAst& policy,
                           RandomSource& rng, BuildTrace* trace = nullptr);

Ciphertext em_encrypt(const PublicKey& pk, const EncryptionMachine& em,
                      std::span<const std::uint8_t> message, RandomSource& rng,
                      EncryptTrace* trace = nullptr);

/// build_em followed by em_encrypt, machine discarded.
Ciphertext encrypt(const PublicKey& pk, const policy::PolicyAst& policy,
                   std::span<const std::uint8_t> message, RandomSource& rng);

/// Throws Error with kind Unsatisfied, Authentication or Verification.
std::vector<std::uint8_t> decrypt(const PublicKey& pk, const SecretKey& sk,
                                  const Ciphertext& ct);

/// As decrypt, also returning the witness. verify_m has already passed.
Opened decrypt_opened(const PublicKey& pk, const SecretKey& sk, const Ciphertext& ct);

/// e(C0, g2) == e(u^{H_m(M)}, g2^q).
bool verify_m(const PublicKey& pk, const Ciphertext& ct,
              std::span<const std::uint8_t> message, const LeftElement& witness);

namespace detail {

/// C~ * F_R / e(C1, root_key), with F_R computed from the leaf components
/// the assignment selects. Shared by local and outsourced decryption.
/// Returns nullopt when the attribute set does not satisfy the tree.
std::optional<TargetElement> unwrap(const Ciphertext& ct, const RightElement& root_key,
                                    std::span<const KeyComponent> components);

/// AEAD associated data: every ciphertext field except the blob itself.
std::vector<std::uint8_t> header_bytes(const Ciphertext& ct);

void check_curve(CurveId expected, CurveId actual, std::string_view what);

}  // namespace detail

}  // namespace abem
