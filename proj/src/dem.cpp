#include "abem/dem.hpp"

#include <algorithm>
#include <array>
#include <memory>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/kdf.h>

#include "abem/errors.hpp"

namespace abem::dem {

namespace {

constexpr std::size_t kChunk = std::size_t{1} << 30;

struct CipherCtxFree {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
struct PkeyCtxFree {
  void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

[[noreturn]] void fail(const char* what) {
  throw Error(ErrorKind::Internal, std::string("openssl: ") + what);
}

struct Keys {
  std::array<std::uint8_t, 32> aes;
  std::array<std::uint8_t, kCommitSize> commit;
};

Keys derive(const TargetElement& k) {
  const auto ikm = k.encode();
  std::unique_ptr<EVP_PKEY_CTX, PkeyCtxFree> ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr));
  std::array<std::uint8_t, 64> okm{};
  std::size_t len = okm.size();
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) <= 0 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), static_cast<int>(ikm.size())) <= 0 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(),
                                  reinterpret_cast<const unsigned char*>(domain::kKdf.data()),
                                  static_cast<int>(domain::kKdf.size())) <= 0 ||
      EVP_PKEY_derive(ctx.get(), okm.data(), &len) <= 0 || len != okm.size()) {
    fail("hkdf");
  }
  Keys keys{};
  std::copy_n(okm.begin(), 32, keys.aes.begin());
  std::copy_n(okm.begin() + 32, kCommitSize, keys.commit.begin());
  OPENSSL_cleanse(okm.data(), okm.size());
  return keys;
}

template <typename Update>
void chunked(std::span<const std::uint8_t> in, std::uint8_t* out, Update&& update) {
  while (!in.empty()) {
    const std::size_t n = std::min(in.size(), kChunk);
    update(in.data(), static_cast<int>(n), out);
    in = in.subspan(n);
    if (out != nullptr) out += n;
  }
}

}  // namespace

std::vector<std::uint8_t> seal(const TargetElement& key,
                               std::span<const std::uint8_t> associated_data,
                               std::span<const std::uint8_t> message,
                               const LeftElement& witness, RandomSource& rng) {
  const Keys keys = derive(key);
  const auto u = witness.encode();
  const std::size_t body = message.size() + u.size();

  std::vector<std::uint8_t> blob(kNonceSize + kCommitSize + body + kTagSize);
  std::uint8_t* nonce = blob.data();
  rng.fill(std::span(nonce, kNonceSize));
  std::copy(keys.commit.begin(), keys.commit.end(), blob.begin() + kNonceSize);
  std::uint8_t* out = blob.data() + kNonceSize + kCommitSize;

  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, keys.aes.data(), nonce) != 1) {
    fail("gcm init");
  }
  int len = 0;
  const auto update = [&](const std::uint8_t* p, int n, std::uint8_t* o) {
    if (EVP_EncryptUpdate(ctx.get(), o, &len, p, n) != 1) fail("gcm update");
  };
  chunked(associated_data, nullptr, update);
  chunked(message, out, update);
  chunked(u, out + message.size(), update);
  if (EVP_EncryptFinal_ex(ctx.get(), out + body, &len) != 1) fail("gcm final");
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagSize, out + body) != 1) {
    fail("gcm tag");
  }
  return blob;
}

OpenResult open(const TargetElement& key, std::span<const std::uint8_t> associated_data,
                std::span<const std::uint8_t> blob) {
  OpenResult result;
  if (blob.size() < kOverhead + LeftElement::kEncodedSize) return result;

  const Keys keys = derive(key);
  const std::uint8_t* nonce = blob.data();
  if (CRYPTO_memcmp(blob.data() + kNonceSize, keys.commit.data(), kCommitSize) != 0) {
    result.status = OpenStatus::WrongKey;
    return result;
  }
  const auto body = blob.subspan(kNonceSize + kCommitSize,
                                 blob.size() - kOverhead);
  const auto tag = blob.subspan(blob.size() - kTagSize);

  std::vector<std::uint8_t> plain(body.size());
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, keys.aes.data(), nonce) != 1) {
    fail("gcm init");
  }
  int len = 0;
  const auto update = [&](const std::uint8_t* p, int n, std::uint8_t* o) {
    if (EVP_DecryptUpdate(ctx.get(), o, &len, p, n) != 1) fail("gcm update");
  };
  chunked(associated_data, nullptr, update);
  chunked(body, plain.data(), update);
  std::array<std::uint8_t, kTagSize> tag_copy{};
  std::copy(tag.begin(), tag.end(), tag_copy.begin());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagSize, tag_copy.data()) != 1) {
    fail("gcm tag");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), plain.data() + plain.size(), &len) != 1) {
    OPENSSL_cleanse(plain.data(), plain.size());
    return result;  // Forged
  }

  const std::size_t msg_len = plain.size() - LeftElement::kEncodedSize;
  auto u = LeftElement::decode(std::span(plain).subspan(msg_len));
  if (!u) return result;  // authenticated but not a group element: sealer misbehaved
  plain.resize(msg_len);
  result.status = OpenStatus::Ok;
  result.message = std::move(plain);
  result.witness = *u;
  return result;
}

}  // namespace abem::dem
