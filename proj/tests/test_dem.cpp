#include "abem/dem.hpp"

#include <openssl/evp.h>
#include <openssl/kdf.h>

#include "support.hpp"

using namespace abem;
using testing::bytes;

namespace {

// Re-derives keys and opens a blob with raw OpenSSL calls.
std::optional<std::vector<std::uint8_t>> reference_open(const TargetElement& k,
                                                        std::span<const std::uint8_t> ad,
                                                        std::span<const std::uint8_t> blob) {
  const auto ikm = k.encode();
  std::array<std::uint8_t, 64> okm{};
  std::size_t len = okm.size();
  EVP_PKEY_CTX* kctx = EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr);
  EVP_PKEY_derive_init(kctx);
  EVP_PKEY_CTX_set_hkdf_md(kctx, EVP_sha256());
  EVP_PKEY_CTX_set1_hkdf_key(kctx, ikm.data(), static_cast<int>(ikm.size()));
  EVP_PKEY_CTX_add1_hkdf_info(kctx, reinterpret_cast<const unsigned char*>("ABEM/KDF"), 8);
  EVP_PKEY_derive(kctx, okm.data(), &len);
  EVP_PKEY_CTX_free(kctx);

  if (!std::equal(okm.begin() + 32, okm.end(), blob.begin() + 12)) return std::nullopt;

  const std::size_t body = blob.size() - 60;
  std::vector<std::uint8_t> out(body);
  EVP_CIPHER_CTX* c = EVP_CIPHER_CTX_new();
  int n = 0;
  EVP_DecryptInit_ex(c, EVP_aes_256_gcm(), nullptr, okm.data(), blob.data());
  EVP_DecryptUpdate(c, nullptr, &n, ad.data(), static_cast<int>(ad.size()));
  EVP_DecryptUpdate(c, out.data(), &n, blob.data() + 44, static_cast<int>(body));
  std::array<std::uint8_t, 16> tag{};
  std::copy_n(blob.end() - 16, 16, tag.begin());
  EVP_CIPHER_CTX_ctrl(c, EVP_CTRL_GCM_SET_TAG, 16, tag.data());
  const bool ok = EVP_DecryptFinal_ex(c, out.data() + n, &n) > 0;
  EVP_CIPHER_CTX_free(c);
  if (!ok) return std::nullopt;
  return out;
}

}  // namespace

TEST_CASE("sealed blob layout matches a reference decryption") {
  SeededRandom rng(41);
  const auto k = TargetElement::random(rng);
  const auto u = LeftElement::generator().pow(Scalar::random(rng));
  const auto ad = bytes("header");
  for (std::size_t size : {0u, 1u, 15u, 16u, 1000u, 70000u}) {
    const auto msg = testing::random_bytes(rng, size);
    const auto blob = dem::seal(k, ad, msg, u, rng);
    REQUIRE(blob.size() == size + 48 + dem::kOverhead);
    const auto plain = reference_open(k, ad, blob);
    REQUIRE(plain.has_value());
    std::vector<std::uint8_t> expected = msg;
    const auto ub = u.encode();
    expected.insert(expected.end(), ub.begin(), ub.end());
    CHECK(*plain == expected);

    const auto r = dem::open(k, ad, blob);
    CHECK(r.status == dem::OpenStatus::Ok);
    CHECK(r.message == msg);
    CHECK(r.witness == u);
  }
}

TEST_CASE("wrong keys and forgeries are told apart") {
  SeededRandom rng(42);
  const auto k = TargetElement::random(rng);
  const auto u = LeftElement::generator();
  const auto blob = dem::seal(k, bytes("ad"), bytes("message"), u, rng);

  CHECK(dem::open(TargetElement::random(rng), bytes("ad"), blob).status == dem::OpenStatus::WrongKey);
  CHECK(dem::open(k, bytes("AD"), blob).status == dem::OpenStatus::Forged);
  for (std::size_t i = 0; i < blob.size(); ++i) {
    auto bad = blob;
    bad[i] ^= 0x80;
    const auto st = dem::open(k, bytes("ad"), bad).status;
    CAPTURE(i);
    if (i >= dem::kNonceSize && i < dem::kNonceSize + dem::kCommitSize) {
      CHECK(st == dem::OpenStatus::WrongKey);
    } else {
      CHECK(st == dem::OpenStatus::Forged);
    }
  }
  CHECK(dem::open(k, bytes("ad"), std::span(blob).first(10)).status == dem::OpenStatus::Forged);
  CHECK(dem::open(k, bytes("ad"), std::span(blob).first(dem::kOverhead + 47)).status ==
        dem::OpenStatus::Forged);
}

TEST_CASE("nonces are fresh") {
  SeededRandom rng(43);
  const auto k = TargetElement::random(rng);
  const auto a = dem::seal(k, {}, bytes("x"), LeftElement::generator(), rng);
  const auto b = dem::seal(k, {}, bytes("x"), LeftElement::generator(), rng);
  CHECK_FALSE(std::equal(a.begin(), a.begin() + 12, b.begin()));
}
