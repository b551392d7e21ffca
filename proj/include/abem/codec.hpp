#pragma once

// Canonical binary encoding.
//
//   envelope := "ABEM" | version 0x01 | object tag | curve id | field*
//   field    := field tag (1) | length (4, big-endian) | value
//
// Fields appear in a fixed order per object kind; repeated groups are
// preceded by a count field. Group elements use fixed-width compressed
// encodings, scalars 32 big-endian bytes. Policies are written in preorder:
//
//   node := 0x00 | len (4) | attribute   (leaf)
//         | 0x01 | k (4) | n (4) | node{n}  (gate)
//
// Decoding is strict: unknown versions, tags or curves are rejected, every
// length is checked before it is read, elements are subgroup-checked, and
// trailing bytes are an error.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abem/outsource.hpp"
#include "abem/scheme.hpp"

namespace abem::codec {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'A', 'B', 'E', 'M'};
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kEnvelopeSize = 7;

enum class ObjectTag : std::uint8_t {
  PublicKey = 0x01,
  MasterKey = 0x02,
  SecretKey = 0x03,
  EncryptionMachine = 0x04,
  Ciphertext = 0x05,
  TransformKey = 0x06,
  RetrievalKey = 0x07,
  PartialDecryption = 0x08,
};

/// "PUBLIC KEY", "CIPHERTEXT", ... as used in armor fences.
std::string_view kind_name(ObjectTag tag);

std::vector<std::uint8_t> encode(const PublicKey& v);
std::vector<std::uint8_t> encode(const MasterKey& v);
std::vector<std::uint8_t> encode(const SecretKey& v);
std::vector<std::uint8_t> encode(const EncryptionMachine& v);
std::vector<std::uint8_t> encode(const Ciphertext& v);
std::vector<std::uint8_t> encode(const TransformKey& v);
std::vector<std::uint8_t> encode(const RetrievalKey& v);
std::vector<std::uint8_t> encode(const PartialDecryption& v);

/// Throws DecodeError. With `expected_curve`, an object made for another
/// curve is a CurveMismatch.
template <typename T>
T decode(std::span<const std::uint8_t> bytes,
         std::optional<CurveId> expected_curve = std::nullopt);

template <> PublicKey decode(std::span<const std::uint8_t>, std::optional<CurveId>);
template <> MasterKey decode(std::span<const std::uint8_t>, std::optional<CurveId>);
template <> SecretKey decode(std::span<const std::uint8_t>, std::optional<CurveId>);
template <> EncryptionMachine decode(std::span<const std::uint8_t>, std::optional<CurveId>);
template <> Ciphertext decode(std::span<const std::uint8_t>, std::optional<CurveId>);
template <> TransformKey decode(std::span<const std::uint8_t>, std::optional<CurveId>);
template <> RetrievalKey decode(std::span<const std::uint8_t>, std::optional<CurveId>);
template <> PartialDecryption decode(std::span<const std::uint8_t>, std::optional<CurveId>);

/// Checks magic and version and returns the object tag.
ObjectTag peek_tag(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_policy(const policy::PolicyAst& ast);
policy::PolicyAst decode_policy(std::span<const std::uint8_t> bytes);

/// Base64 between "-----BEGIN ABEM <KIND>-----" / "-----END ABEM <KIND>-----".
std::string armor(std::span<const std::uint8_t> encoded);
std::vector<std::uint8_t> dearmor(std::string_view text);
bool looks_armored(std::span<const std::uint8_t> bytes);

}  // namespace abem::codec
