#pragma once

// Thin RAII wrappers over OpenSSL EVP digests. Internal to the library.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include <openssl/evp.h>

namespace abem::detail {

template <std::size_t N>
class Digest {
 public:
  explicit Digest(const EVP_MD* md);
  ~Digest();
  Digest(const Digest&) = delete;
  Digest& operator=(const Digest&) = delete;

  Digest& update(std::span<const std::uint8_t> data);
  Digest& update(std::string_view data);
  /// Writes the length of `data` as 8 big-endian bytes, then `data`.
  Digest& update_prefixed(std::span<const std::uint8_t> data);
  Digest& update_prefixed(std::string_view data);
  std::array<std::uint8_t, N> finish();

 private:
  EVP_MD_CTX* ctx_;
};

using Sha256 = Digest<32>;
using Sha512 = Digest<64>;

inline Sha256 make_sha256() { return Sha256(EVP_sha256()); }
inline Sha512 make_sha512() { return Sha512(EVP_sha512()); }

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);

}  // namespace abem::detail
