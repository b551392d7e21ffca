#pragma once

// Prime-order bilinear group suite over BLS12-381 (blst backend).
//
// Values that the scheme needs on both sides of a pairing (the generator,
// g^q) are carried as MirroredElement: the same discrete log applied to
// both generators. Attribute hashes exist only in G1 and have no known
// discrete log.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <blst.h>

#include "abem/random.hpp"

namespace abem {

/// Backend descriptor recorded in every serialized object.
enum class CurveId : std::uint8_t {
  Bls12_381 = 0x01,
};

std::string_view curve_name(CurveId id);
/// Accepts "bls12-381" (case-insensitive). Throws Error(Usage) otherwise.
CurveId curve_from_name(std::string_view name);
/// Curve selected by the ABEM_CURVE environment variable, default BLS12-381.
CurveId default_curve();

namespace domain {
inline constexpr std::string_view kMessageHash = "ABEM/Hm";
inline constexpr std::string_view kAttributeHash = "ABEM-V01-CS01-with-BLS12381G1_XMD:SHA-256_SSWU_RO_Ha";
inline constexpr std::string_view kKdf = "ABEM/KDF";
}  // namespace domain

/// Integer modulo the group order r (~2^255).
class Scalar {
 public:
  static constexpr std::size_t kEncodedSize = 32;
  using Bytes = std::array<std::uint8_t, kEncodedSize>;

  Scalar();  // zero

  static Scalar from_u64(std::uint64_t v);
  /// `s` must already be reduced mod r.
  static Scalar from_blst(const blst_scalar& s);
  static Scalar random(RandomSource& rng);
  /// Rejection-samples until nonzero; use for exponents that must invert.
  static Scalar random_nonzero(RandomSource& rng);
  /// Length-prefixed domain tag, then data, through SHA-512, reduced mod r.
  static Scalar hash_to(std::string_view domain_tag,
                        std::span<const std::uint8_t> data);
  /// Strict: big-endian, must be < r.
  static std::optional<Scalar> decode(std::span<const std::uint8_t> bytes);

  Bytes encode() const;
  bool is_zero() const;

  /// Multiplicative inverse. Throws std::domain_error on zero.
  Scalar inverse() const;

  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const;
  Scalar operator*(const Scalar& o) const;
  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  friend bool operator==(const Scalar& a, const Scalar& b);

  const blst_fr& raw() const { return fr_; }
  /// Little-endian 256-bit form consumed by blst point multiplication.
  blst_scalar to_blst_scalar() const;

 private:
  blst_fr fr_;
};

/// Element of G1.
class LeftElement {
 public:
  static constexpr std::size_t kEncodedSize = 48;
  using Bytes = std::array<std::uint8_t, kEncodedSize>;

  LeftElement();  // identity

  static LeftElement generator();
  static LeftElement identity() { return {}; }

  LeftElement operator*(const LeftElement& o) const;
  LeftElement pow(const Scalar& k) const;
  LeftElement inverse() const;
  bool is_identity() const;

  Bytes encode() const;
  /// Rejects off-curve points and points outside the prime-order subgroup.
  static std::optional<LeftElement> decode(std::span<const std::uint8_t> bytes);

  friend bool operator==(const LeftElement& a, const LeftElement& b);

  const blst_p1& raw() const { return p_; }
  blst_p1_affine to_affine() const;
  static LeftElement from_raw(const blst_p1& p);

 private:
  blst_p1 p_;
};

/// Element of G2.
class RightElement {
 public:
  static constexpr std::size_t kEncodedSize = 96;
  using Bytes = std::array<std::uint8_t, kEncodedSize>;

  RightElement();  // identity

  static RightElement generator();
  static RightElement identity() { return {}; }

  RightElement operator*(const RightElement& o) const;
  RightElement pow(const Scalar& k) const;
  RightElement inverse() const;
  bool is_identity() const;

  Bytes encode() const;
  static std::optional<RightElement> decode(std::span<const std::uint8_t> bytes);

  friend bool operator==(const RightElement& a, const RightElement& b);

  const blst_p2& raw() const { return p_; }
  blst_p2_affine to_affine() const;

 private:
  blst_p2 p_;
};

/// Element of the pairing target group GT (order-r subgroup of Fp12*).
class TargetElement {
 public:
  static constexpr std::size_t kEncodedSize = 576;
  using Bytes = std::array<std::uint8_t, kEncodedSize>;

  TargetElement();  // identity

  static TargetElement identity() { return {}; }
  /// e(g1, g2), computed once.
  static const TargetElement& generator();
  /// generator()^k for a fresh nonzero k.
  static TargetElement random(RandomSource& rng);

  TargetElement operator*(const TargetElement& o) const;
  TargetElement operator/(const TargetElement& o) const;
  TargetElement pow(const Scalar& k) const;
  TargetElement inverse() const;
  bool is_identity() const;

  /// Twelve big-endian base-field coefficients, 48 bytes each.
  Bytes encode() const;
  static std::optional<TargetElement> decode(std::span<const std::uint8_t> bytes);

  friend bool operator==(const TargetElement& a, const TargetElement& b);

  const blst_fp12& raw() const { return f_; }
  static TargetElement from_raw(const blst_fp12& f);

 private:
  blst_fp12 f_;
};

/// The same exponent k applied to both generators: left = g1^k, right = g2^k.
struct MirroredElement {
  static constexpr std::size_t kEncodedSize =
      LeftElement::kEncodedSize + RightElement::kEncodedSize;

  LeftElement left;
  RightElement right;
  std::optional<Scalar> log;  // only when built from a known exponent

  static MirroredElement from_exponent(const Scalar& k);
  static MirroredElement generator() { return from_exponent(Scalar::from_u64(1)); }

  /// e(left, g2) == e(g1, right).
  bool consistent() const;

  friend bool operator==(const MirroredElement& a, const MirroredElement& b) {
    return a.left == b.left && a.right == b.right;
  }
};

TargetElement pair(const LeftElement& a, const RightElement& b);

/// Product of pairings with a single final exponentiation.
TargetElement pair_product(
    std::span<const std::pair<LeftElement, RightElement>> terms);

/// H_m: message bytes to Z_r.
Scalar hash_message(std::span<const std::uint8_t> message);

/// Trims ASCII whitespace and checks the attribute alphabet
/// [A-Za-z_][A-Za-z0-9_:.-]*, minus the policy keywords. Throws
/// Error(Usage) on anything else. The alphabet is ASCII, so the result is
/// already in Unicode NFC.
std::string normalize_attribute(std::string_view attr);

/// H_a: hash-to-curve into G1 (SSWU, random-oracle variant) of the
/// normalized attribute.
LeftElement attribute_element(std::string_view attr);

}  // namespace abem
