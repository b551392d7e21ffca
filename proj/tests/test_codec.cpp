#include "abem/codec.hpp"

#include "abem/bench.hpp"
#include "abem/errors.hpp"
#include "support.hpp"

using namespace abem;
using testing::bytes;

namespace {

std::optional<DecodeFailure> failure_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DecodeError& e) {
    return e.failure();
  }
  return std::nullopt;
}

void append_field(std::vector<std::uint8_t>& out, std::uint8_t tag, std::span<const std::uint8_t> v) {
  out.push_back(tag);
  const auto n = static_cast<std::uint32_t>(v.size());
  out.insert(out.end(), {std::uint8_t(n >> 24), std::uint8_t(n >> 16), std::uint8_t(n >> 8), std::uint8_t(n)});
  out.insert(out.end(), v.begin(), v.end());
}

struct World {
  SeededRandom rng{61};
  KeyPair kp = setup(rng);
  SecretKey sk;
  TransformKeyPair pair;
  EncryptionMachine em;
  Ciphertext ct;
  PartialDecryption partial;

  World() {
    const std::vector<std::string> attrs{"A", "B", "dept:x"};
    sk = keygen(kp.pk, kp.mk, attrs, rng);
    pair = gen_tk(kp.pk, sk, rng);
    em = build_em(kp.pk, policy::parse_policy("2 of (A, B and C, dept:x)"), rng);
    ct = em_encrypt(kp.pk, em, bytes("codec"), rng);
    partial = *transform(pair.tk, ct);
  }

  std::vector<std::vector<std::uint8_t>> all() const {
    return {codec::encode(kp.pk), codec::encode(kp.mk), codec::encode(sk), codec::encode(em),
            codec::encode(ct),    codec::encode(pair.tk), codec::encode(pair.rk),
            codec::encode(partial)};
  }
};

// Decodes `b` as whatever kind its tag says and re-encodes it.
std::vector<std::uint8_t> reencode(std::span<const std::uint8_t> b) {
  switch (codec::peek_tag(b)) {
    case codec::ObjectTag::PublicKey: return codec::encode(codec::decode<PublicKey>(b));
    case codec::ObjectTag::MasterKey: return codec::encode(codec::decode<MasterKey>(b));
    case codec::ObjectTag::SecretKey: return codec::encode(codec::decode<SecretKey>(b));
    case codec::ObjectTag::EncryptionMachine: return codec::encode(codec::decode<EncryptionMachine>(b));
    case codec::ObjectTag::Ciphertext: return codec::encode(codec::decode<Ciphertext>(b));
    case codec::ObjectTag::TransformKey: return codec::encode(codec::decode<TransformKey>(b));
    case codec::ObjectTag::RetrievalKey: return codec::encode(codec::decode<RetrievalKey>(b));
    case codec::ObjectTag::PartialDecryption: return codec::encode(codec::decode<PartialDecryption>(b));
  }
  return {};
}

}  // namespace

TEST_CASE("golden envelope and field layout") {
  const World w;
  std::vector<std::uint8_t> expected{'A', 'B', 'E', 'M', 0x01, 0x07, 0x01};
  append_field(expected, 0x01, w.pair.rk.d_r.encode());
  append_field(expected, 0x02, w.pair.rk.d_hat_r.encode());
  CHECK(codec::encode(w.pair.rk) == expected);

  std::vector<std::uint8_t> pd{'A', 'B', 'E', 'M', 0x01, 0x08, 0x01};
  append_field(pd, 0x01, w.partial.t.encode());
  append_field(pd, 0x02, w.partial.ciphertext_digest);
  CHECK(codec::encode(w.partial) == pd);

  std::vector<std::uint8_t> mk{'A', 'B', 'E', 'M', 0x01, 0x02, 0x01};
  append_field(mk, 0x01, w.kp.mk.beta.encode());
  append_field(mk, 0x02, w.kp.mk.g_alpha.encode());
  append_field(mk, 0x03, w.kp.mk.q.encode());
  CHECK(codec::encode(w.kp.mk) == mk);
}

TEST_CASE("golden policy encoding") {
  const auto enc = codec::encode_policy(policy::parse_policy("2 of (A, Bc)"));
  const std::vector<std::uint8_t> expected{0x01, 0, 0, 0, 2, 0, 0, 0, 2,        //
                                           0x00, 0, 0, 0, 1, 'A',               //
                                           0x00, 0, 0, 0, 2, 'B', 'c'};
  CHECK(enc == expected);
  CHECK(codec::decode_policy(expected) == policy::parse_policy("2 of (A, Bc)"));
  auto bad = expected;
  bad[4] = 3;  // k > n
  CHECK(failure_of([&] { codec::decode_policy(bad); }) == DecodeFailure::Malformed);
  bad = expected;
  bad.back() = ' ';
  CHECK(failure_of([&] { codec::decode_policy(bad); }) == DecodeFailure::Malformed);
}

TEST_CASE("every kind round-trips byte for byte") {
  const World w;
  for (const auto& b : w.all()) CHECK(reencode(b) == b);
  const auto ct = codec::decode<Ciphertext>(codec::encode(w.ct));
  const auto sk = codec::decode<SecretKey>(codec::encode(w.sk));
  CHECK(decrypt(w.kp.pk, sk, ct) == bytes("codec"));
  CHECK(detail::header_bytes(w.ct).size() + 5 + w.ct.dem.size() == codec::encode(w.ct).size());
}

TEST_CASE("envelope checks come in a fixed order") {
  const World w;
  const auto sk = codec::encode(w.sk);
  auto b = sk;
  b[0] = 'X';
  CHECK(failure_of([&] { codec::decode<SecretKey>(b); }) == DecodeFailure::BadMagic);
  CHECK(failure_of([&] { codec::decode<SecretKey>(std::span(sk).first(3)); }) == DecodeFailure::Truncated);
  CHECK(failure_of([&] { codec::decode<SecretKey>(std::span(sk).first(6)); }) == DecodeFailure::Truncated);
  b = sk;
  b[4] = 0x02;
  CHECK(failure_of([&] { codec::decode<SecretKey>(b); }) == DecodeFailure::UnsupportedVersion);
  CHECK(failure_of([&] { codec::decode<TransformKey>(sk); }) == DecodeFailure::TagMismatch);
  b = sk;
  b[5] = 0x09;
  CHECK(failure_of([&] { codec::decode<SecretKey>(b); }) == DecodeFailure::TagMismatch);
  b = sk;
  b[6] = 0x02;
  CHECK(failure_of([&] { codec::decode<SecretKey>(b); }) == DecodeFailure::CurveMismatch);
  b = sk;
  b.push_back(0);
  CHECK(failure_of([&] { codec::decode<SecretKey>(b); }) == DecodeFailure::Malformed);
  CHECK(failure_of([&] { codec::decode<SecretKey>(sk, CurveId::Bls12_381); }) == std::nullopt);
}

TEST_CASE("every strict prefix is rejected") {
  const World w;
  for (const auto& b : w.all()) {
    for (std::size_t n = 0; n < b.size(); n += (b.size() > 4000 ? 7 : 1)) {
      const auto f = failure_of([&] { reencode(std::span(b).first(n)); });
      REQUIRE(f.has_value());
      CHECK((*f == DecodeFailure::Truncated || *f == DecodeFailure::BadMagic));
    }
  }
}

TEST_CASE("invalid group elements and key structure") {
  const World w;
  auto pk = codec::encode(w.kp.pk);
  // The g field starts after the envelope and a five-byte field header.
  for (std::size_t i = 12; i < 12 + 48; ++i) pk[i] = 0xFF;
  CHECK(failure_of([&] { codec::decode<PublicKey>(pk); }) == DecodeFailure::InvalidElement);

  SecretKey unsorted = w.sk;
  std::swap(unsorted.components[0], unsorted.components[1]);
  CHECK(failure_of([&] { codec::decode<SecretKey>(codec::encode(unsorted)); }) == DecodeFailure::Malformed);
  SecretKey dup = w.sk;
  dup.components[1] = dup.components[0];
  CHECK(failure_of([&] { codec::decode<SecretKey>(codec::encode(dup)); }) == DecodeFailure::Malformed);
  SecretKey empty = w.sk;
  empty.components.clear();
  CHECK(failure_of([&] { codec::decode<SecretKey>(codec::encode(empty)); }) == DecodeFailure::Malformed);
  SecretKey padded = w.sk;
  padded.components[0].attribute = " A";
  CHECK(failure_of([&] { codec::decode<SecretKey>(codec::encode(padded)); }) == DecodeFailure::Malformed);

  Ciphertext short_ct = w.ct;
  short_ct.leaves.pop_back();
  CHECK(failure_of([&] { codec::decode<Ciphertext>(codec::encode(short_ct)); }) == DecodeFailure::Malformed);
  MasterKey zero_beta = w.kp.mk;
  zero_beta.beta = Scalar::from_u64(0);
  CHECK(failure_of([&] { codec::decode<MasterKey>(codec::encode(zero_beta)); }) == DecodeFailure::Malformed);
}

TEST_CASE("armor") {
  const World w;
  for (const auto& b : w.all()) {
    const std::string text = codec::armor(b);
    CHECK(codec::looks_armored(bytes(text)));
    CHECK(codec::dearmor(text) == b);
    std::size_t longest = 0, start = 0;
    for (std::size_t nl = text.find('\n'); nl != std::string::npos; nl = text.find('\n', start)) {
      longest = std::max(longest, nl - start);
      start = nl + 1;
    }
    CHECK(longest <= 64 + 30);
  }
  const std::string ct = codec::armor(codec::encode(w.ct));
  CHECK(ct.rfind("-----BEGIN ABEM CIPHERTEXT-----\n", 0) == 0);
  CHECK(ct.find("-----END ABEM CIPHERTEXT-----\n") != std::string::npos);
  CHECK_FALSE(codec::looks_armored(codec::encode(w.ct)));

  std::string relabelled = ct;
  relabelled.replace(relabelled.find("BEGIN ABEM CIPHERTEXT"), 21, "BEGIN ABEM SECRET KEY");
  relabelled.replace(relabelled.find("END ABEM CIPHERTEXT"), 19, "END ABEM SECRET KEY");
  CHECK(failure_of([&] { codec::dearmor(relabelled); }) == DecodeFailure::TagMismatch);
  std::string broken = ct;
  broken[40] = '*';
  CHECK(failure_of([&] { codec::dearmor(broken); }).has_value());
  CHECK(failure_of([&] { codec::dearmor(ct.substr(0, ct.size() - 10)); }) == DecodeFailure::Truncated);
}

TEST_CASE("random mutations never decode to a different object silently") {
  const World w;
  SeededRandom rng(62);
  for (const auto& b : w.all()) {
    for (int i = 0; i < 60; ++i) {
      auto m = b;
      const std::size_t pos = bench::uniform(rng, m.size());
      m[pos] ^= static_cast<std::uint8_t>(1 + bench::uniform(rng, 255));
      // Anything that decodes must re-encode to exactly the mutated bytes.
      std::optional<std::vector<std::uint8_t>> again;
      try {
        again = reencode(m);
      } catch (const DecodeError&) {
      }
      if (again) CHECK(*again == m);
    }
  }
}
