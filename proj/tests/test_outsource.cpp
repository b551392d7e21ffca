#include "abem/outsource.hpp"

#include "abem/bench.hpp"
#include "abem/codec.hpp"
#include "abem/errors.hpp"
#include "support.hpp"

using namespace abem;
using testing::bytes;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

struct Fixture {
  SeededRandom rng{51};
  SetupTrace st;
  KeyPair kp = setup(rng, CurveId::Bls12_381, &st);
};

}  // namespace

TEST_CASE("transform and retrieval keys match their blinding exponents") {
  Fixture f;
  const std::vector<std::string> attrs{"A", "B"};
  const auto sk = keygen(f.kp.pk, f.kp.mk, attrs, f.rng);
  GenTkTrace gt;
  const auto pair = gen_tk(f.kp.pk, sk, f.rng, &gt);
  const auto g1 = LeftElement::generator();
  const auto g2 = RightElement::generator();
  CHECK(pair.tk.d == sk.d * g2.pow(gt.v));
  REQUIRE(pair.tk.components.size() == sk.components.size());
  for (std::size_t j = 0; j < sk.components.size(); ++j) {
    CHECK(pair.tk.components[j].attribute == sk.components[j].attribute);
    CHECK(pair.tk.components[j].d == sk.components[j].d * g1.pow(f.st.beta * gt.w_over_beta));
    CHECK(pair.tk.components[j].d_prime == sk.components[j].d_prime);
  }
  CHECK(pair.rk.d_r == g2.pow(gt.v));
  CHECK(pair.rk.d_hat_r == g2.pow(gt.w_over_beta));
  CHECK(pair.tk.attributes() == sk.attributes());
}

TEST_CASE("partial decryption is the blinded payload key") {
  Fixture f;
  const std::vector<std::string> attrs{"A", "C"};
  const auto sk = keygen(f.kp.pk, f.kp.mk, attrs, f.rng);
  GenTkTrace gt;
  const auto pair = gen_tk(f.kp.pk, sk, f.rng, &gt);
  const auto em = build_em(f.kp.pk, policy::parse_policy("A and (B or C)"), f.rng);
  EncryptTrace et;
  const auto msg = bytes("outsourced");
  const auto ct = em_encrypt(f.kp.pk, em, msg, f.rng, &et);

  const auto partial = transform(pair.tk, ct);
  REQUIRE(partial.has_value());
  const Scalar st = (em.root_secret + et.delta) * et.t;
  const Scalar w = f.st.beta * gt.w_over_beta;
  const Scalar blind = (w - f.st.beta * gt.v) * st;
  CHECK(partial->t == et.payload_key * TargetElement::generator().pow(blind));
  CHECK(partial->ciphertext_digest == ciphertext_digest(ct));
  CHECK(codec::encode(*transform(f.kp.pk, pair.tk, ct)) == codec::encode(*partial));
  CHECK(recover(f.kp.pk, pair.rk, ct, *partial) == msg);
  const auto opened = recover_opened(f.kp.pk, pair.rk, ct, *partial);
  CHECK(opened.witness == LeftElement::generator().pow(et.x));
}

TEST_CASE("outsourced and direct decryption agree") {
  Fixture f;
  for (int i = 0; i < 30; ++i) {
    const auto tree = bench::gen_random_tree(3, 3 + bench::uniform(f.rng, 10), f.rng);
    const std::vector<std::string> attrs(tree.satisfying.begin(), tree.satisfying.end());
    const auto sk = keygen(f.kp.pk, f.kp.mk, attrs, f.rng);
    const auto pair = gen_tk(f.kp.pk, sk, f.rng);
    const auto msg = testing::random_bytes(f.rng, bench::uniform(f.rng, 2048));
    const auto ct = encrypt(f.kp.pk, tree.ast, msg, f.rng);
    const auto partial = transform(pair.tk, ct);
    REQUIRE(partial.has_value());
    CHECK(recover(f.kp.pk, pair.rk, ct, *partial) == decrypt(f.kp.pk, sk, ct));
  }
}

TEST_CASE("unsatisfied transform keys yield no partial") {
  Fixture f;
  const std::vector<std::string> attrs{"A"};
  const auto pair = gen_tk(f.kp.pk, keygen(f.kp.pk, f.kp.mk, attrs, f.rng), f.rng);
  const auto ct = encrypt(f.kp.pk, policy::parse_policy("A and B"), bytes("m"), f.rng);
  CHECK_FALSE(transform(pair.tk, ct).has_value());
}

TEST_CASE("cheating proxies are caught") {
  Fixture f;
  const std::vector<std::string> attrs{"A", "B"};
  const auto sk = keygen(f.kp.pk, f.kp.mk, attrs, f.rng);
  const auto pair = gen_tk(f.kp.pk, sk, f.rng);
  const auto ast = policy::parse_policy("A and B");
  const auto ct = encrypt(f.kp.pk, ast, bytes("one"), f.rng);
  const auto other = encrypt(f.kp.pk, ast, bytes("two"), f.rng);
  const auto partial = *transform(pair.tk, ct);

  for (int i = 0; i < 20; ++i) {
    auto bad = partial;
    bad.t = bad.t * TargetElement::generator().pow(Scalar::random_nonzero(f.rng));
    CHECK(kind_of([&] { recover(f.kp.pk, pair.rk, ct, bad); }) == ErrorKind::Verification);
  }

  // A partial for another ciphertext is refused by its digest.
  CHECK(kind_of([&] { recover(f.kp.pk, pair.rk, ct, *transform(pair.tk, other)); }) ==
        ErrorKind::EchoMismatch);
  // Same T but relabelled with this ciphertext's digest: the key is wrong.
  auto relabelled = *transform(pair.tk, other);
  relabelled.ciphertext_digest = partial.ciphertext_digest;
  CHECK(kind_of([&] { recover(f.kp.pk, pair.rk, ct, relabelled); }) == ErrorKind::Verification);

  // Payload tampering with an honest partial is an authentication failure.
  auto tampered = ct;
  tampered.dem.back() ^= 1;
  const auto honest = *transform(pair.tk, tampered);
  CHECK(kind_of([&] { recover(f.kp.pk, pair.rk, tampered, honest); }) == ErrorKind::Authentication);

  // The retrieval key of another user cannot finish the job.
  const auto stranger = gen_tk(f.kp.pk, sk, f.rng);
  CHECK(kind_of([&] { recover(f.kp.pk, stranger.rk, ct, partial); }) == ErrorKind::Verification);
}
