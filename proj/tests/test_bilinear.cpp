#include <openssl/bn.h>
#include <openssl/evp.h>

#include <memory>

#include "abem/bilinear.hpp"
#include "abem/errors.hpp"
#include "support.hpp"

using namespace abem;

namespace {

// Independent big-integer model of Z_r built on OpenSSL BIGNUM.
constexpr const char* kOrderHex = "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001";

struct BnDeleter {
  void operator()(BIGNUM* b) const { BN_free(b); }
};
using Bn = std::unique_ptr<BIGNUM, BnDeleter>;

Bn bn_from(std::span<const std::uint8_t> be) {
  return Bn(BN_bin2bn(be.data(), static_cast<int>(be.size()), nullptr));
}

Bn order() {
  BIGNUM* b = nullptr;
  BN_hex2bn(&b, kOrderHex);
  return Bn(b);
}

std::array<std::uint8_t, 32> bn_bytes(const BIGNUM* b) {
  std::array<std::uint8_t, 32> out{};
  BN_bn2binpad(b, out.data(), 32);
  return out;
}

enum class Op { Add, Sub, Mul, Inv };

std::array<std::uint8_t, 32> oracle(Op op, const Scalar& a, const Scalar& b) {
  BN_CTX* ctx = BN_CTX_new();
  const Bn r = order();
  const auto ab = a.encode();
  const auto bb = b.encode();
  Bn x = bn_from(ab), y = bn_from(bb), z(BN_new());
  switch (op) {
    case Op::Add: BN_mod_add(z.get(), x.get(), y.get(), r.get(), ctx); break;
    case Op::Sub: BN_mod_sub(z.get(), x.get(), y.get(), r.get(), ctx); break;
    case Op::Mul: BN_mod_mul(z.get(), x.get(), y.get(), r.get(), ctx); break;
    case Op::Inv: BN_mod_inverse(z.get(), x.get(), r.get(), ctx); break;
  }
  BN_CTX_free(ctx);
  return bn_bytes(z.get());
}

}  // namespace

TEST_CASE("scalar arithmetic agrees with a big-integer model") {
  SeededRandom rng(11);
  for (int i = 0; i < 200; ++i) {
    const Scalar a = Scalar::random(rng);
    const Scalar b = Scalar::random(rng);
    CHECK((a + b).encode() == oracle(Op::Add, a, b));
    CHECK((a - b).encode() == oracle(Op::Sub, a, b));
    CHECK((a * b).encode() == oracle(Op::Mul, a, b));
    if (!a.is_zero()) CHECK(a.inverse().encode() == oracle(Op::Inv, a, a));
  }
}

TEST_CASE("scalar decode is strict") {
  const auto r = testing::from_hex(kOrderHex);
  CHECK_FALSE(Scalar::decode(r).has_value());
  auto r_minus_1 = r;
  r_minus_1.back() = 0x00;
  REQUIRE(Scalar::decode(r_minus_1).has_value());
  CHECK(*Scalar::decode(r_minus_1) == -Scalar::from_u64(1));
  CHECK_FALSE(Scalar::decode(std::vector<std::uint8_t>(31, 0)).has_value());
  CHECK_THROWS_AS((void)Scalar::from_u64(0).inverse(), std::domain_error);
}

TEST_CASE("hash to scalar is SHA-512 over a length-prefixed tag, reduced") {
  const std::string tag = "ABEM/Hm";
  const auto data = testing::bytes("hello");
  std::vector<std::uint8_t> in(8, 0);
  in[7] = static_cast<std::uint8_t>(tag.size());
  in.insert(in.end(), tag.begin(), tag.end());
  in.insert(in.end(), data.begin(), data.end());
  std::array<std::uint8_t, 64> digest{};
  unsigned len = 0;
  EVP_Digest(in.data(), in.size(), digest.data(), &len, EVP_sha512(), nullptr);

  BN_CTX* ctx = BN_CTX_new();
  Bn wide = bn_from(digest), r = order(), rem(BN_new());
  BN_mod(rem.get(), wide.get(), r.get(), ctx);
  BN_CTX_free(ctx);

  CHECK(hash_message(data).encode() == bn_bytes(rem.get()));
  CHECK(Scalar::hash_to(tag, data) == hash_message(data));
  CHECK_FALSE(Scalar::hash_to("ABEM/Ha", data) == hash_message(data));
}

TEST_CASE("bilinearity on random exponents") {
  SeededRandom rng(12);
  const auto g1 = LeftElement::generator();
  const auto g2 = RightElement::generator();
  const TargetElement e = pair(g1, g2);
  CHECK(e == TargetElement::generator());
  CHECK_FALSE(e.is_identity());
  for (int i = 0; i < 20; ++i) {
    const Scalar a = Scalar::random(rng), b = Scalar::random(rng);
    CHECK(pair(g1.pow(a), g2.pow(b)) == e.pow(a * b));
    CHECK(pair(g1.pow(a), g2) == pair(g1, g2.pow(a)));
  }
}

TEST_CASE("group laws") {
  SeededRandom rng(13);
  const Scalar a = Scalar::random(rng), b = Scalar::random(rng);
  const auto p = LeftElement::generator();
  const auto q = RightElement::generator();
  const auto t = TargetElement::generator();
  CHECK(p.pow(a) * p.pow(b) == p.pow(a + b));
  CHECK(q.pow(a) * q.pow(b) == q.pow(a + b));
  CHECK(t.pow(a) * t.pow(b) == t.pow(a + b));
  CHECK((p.pow(a) * p.pow(a).inverse()).is_identity());
  CHECK((q.pow(a) * q.pow(a).inverse()).is_identity());
  CHECK((t.pow(a) / t.pow(a)).is_identity());
  CHECK(p.pow(Scalar::from_u64(0)).is_identity());
  CHECK(t.pow(Scalar::from_u64(0)).is_identity());

  // Small exponents against repeated multiplication.
  TargetElement acc;
  for (std::uint64_t k = 0; k < 20; ++k) {
    CHECK(t.pow(Scalar::from_u64(k)) == acc);
    acc = acc * t;
  }
}

TEST_CASE("pair product matches separate pairings") {
  SeededRandom rng(14);
  std::vector<std::pair<LeftElement, RightElement>> terms;
  TargetElement expected;
  for (int i = 0; i < 5; ++i) {
    const auto a = LeftElement::generator().pow(Scalar::random(rng));
    const auto b = RightElement::generator().pow(Scalar::random(rng));
    terms.emplace_back(a, b);
    expected = expected * pair(a, b);
  }
  terms.emplace_back(LeftElement::identity(), RightElement::generator());
  CHECK(pair_product(terms) == expected);
  CHECK(pair_product({}).is_identity());
}

TEST_CASE("mirrored elements share one discrete log") {
  SeededRandom rng(15);
  for (int i = 0; i < 20; ++i) {
    const auto m = MirroredElement::from_exponent(Scalar::random(rng));
    CHECK(m.consistent());
  }
  auto bad = MirroredElement::from_exponent(Scalar::from_u64(5));
  bad.right = RightElement::generator().pow(Scalar::from_u64(6));
  bad.log.reset();
  CHECK_FALSE(bad.consistent());
}

TEST_CASE("element encodings round-trip and reject junk") {
  SeededRandom rng(16);
  const Scalar k = Scalar::random(rng);
  const auto p = LeftElement::generator().pow(k);
  const auto q = RightElement::generator().pow(k);
  const auto t = TargetElement::generator().pow(k);
  CHECK(*LeftElement::decode(p.encode()) == p);
  CHECK(*RightElement::decode(q.encode()) == q);
  CHECK(*TargetElement::decode(t.encode()) == t);
  CHECK(*LeftElement::decode(LeftElement::identity().encode()) == LeftElement::identity());

  auto pb = p.encode();
  pb[10] ^= 0x01;
  const auto flipped = LeftElement::decode(pb);
  CHECK((!flipped || !(*flipped == p)));

  std::vector<std::uint8_t> junk(48, 0xFF);
  CHECK_FALSE(LeftElement::decode(junk).has_value());
  CHECK_FALSE(RightElement::decode(std::vector<std::uint8_t>(96, 0xFF)).has_value());

  // A random Fp12 value is not in the order-r subgroup of the target group.
  auto tb = t.encode();
  tb[575] ^= 0x01;
  CHECK_FALSE(TargetElement::decode(tb).has_value());
  CHECK_FALSE(TargetElement::decode(std::vector<std::uint8_t>(576, 0xFF)).has_value());
}

TEST_CASE("attribute hashing") {
  CHECK(attribute_element("  Dept:HR ") == attribute_element("Dept:HR"));
  CHECK_FALSE(attribute_element("A") == attribute_element("B"));
  CHECK_FALSE(attribute_element("A").is_identity());
  CHECK(normalize_attribute("\tx.y-z_1\n") == "x.y-z_1");
  CHECK_THROWS_AS(normalize_attribute(""), Error);
  CHECK_THROWS_AS(normalize_attribute("1abc"), Error);
  CHECK_THROWS_AS(normalize_attribute("a b"), Error);
  CHECK_THROWS_AS(normalize_attribute("and"), Error);
  CHECK_THROWS_AS(normalize_attribute("caf\xc3\xa9"), Error);
}

TEST_CASE("curve descriptors") {
  CHECK(curve_from_name("BLS12-381") == CurveId::Bls12_381);
  CHECK(curve_name(CurveId::Bls12_381) == "bls12-381");
  CHECK_THROWS_AS(curve_from_name("bn254"), Error);
}
