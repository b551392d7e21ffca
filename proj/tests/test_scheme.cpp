#include "abem/scheme.hpp"

#include "abem/bench.hpp"
#include "abem/errors.hpp"
#include "support.hpp"

using namespace abem;
using testing::bytes;

namespace {

struct Fixture {
  SeededRandom rng{31};
  SetupTrace st;
  KeyPair kp = setup(rng, CurveId::Bls12_381, &st);

  SecretKey key(std::vector<std::string> attrs, KeygenTrace* trace = nullptr) {
    return keygen(kp.pk, kp.mk, attrs, rng, trace);
  }
};

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("setup publishes the expected elements") {
  Fixture f;
  const auto g1 = LeftElement::generator();
  const auto g2 = RightElement::generator();
  CHECK(f.kp.pk.egg_alpha == pair(g1, g2).pow(f.st.alpha));
  CHECK(f.kp.pk.h == g1.pow(f.st.beta));
  CHECK(f.kp.mk.g_alpha == g2.pow(f.st.alpha));
  CHECK(f.kp.mk.beta == f.st.beta);
  CHECK(f.kp.pk.gq.left == g1.pow(f.st.q));
  CHECK(f.kp.pk.gq.right == g2.pow(f.st.q));
  CHECK(f.kp.pk.g.consistent());
}

TEST_CASE("keygen components match their exponents") {
  Fixture f;
  KeygenTrace kt;
  const auto sk = f.key({"B", "A", " C"}, &kt);
  REQUIRE(sk.components.size() == 3);
  CHECK(sk.attributes() == policy::AttributeSet{"A", "B", "C"});
  const auto g1 = LeftElement::generator();
  const auto g2 = RightElement::generator();
  CHECK(sk.d == g2.pow((f.st.alpha + kt.r) * f.st.beta.inverse()));
  for (std::size_t j = 0; j < 3; ++j) {
    const auto& c = sk.components[j];
    CHECK(c.d == g1.pow(kt.r) * attribute_element(c.attribute).pow(kt.r_j[j]));
    CHECK(c.d_prime == g2.pow(kt.r_j[j]));
  }
  CHECK(sk.find("B") == &sk.components[1]);
  CHECK(sk.find("D") == nullptr);
  CHECK(kind_of([&] { f.key({}); }) == ErrorKind::Usage);
  CHECK(kind_of([&] { f.key({"no spaces"}); }) == ErrorKind::Usage);
}

TEST_CASE("encryption machine and re-randomized ciphertext algebra") {
  Fixture f;
  const auto ast = policy::parse_policy("2 of (A, B and C, D)");
  BuildTrace bt;
  const auto em = build_em(f.kp.pk, ast, f.rng, &bt);
  const auto g1 = LeftElement::generator();
  const auto g2 = RightElement::generator();
  REQUIRE(em.leaves.size() == 4);
  CHECK(bt.sharing.secret == em.root_secret);
  const auto attrs = policy::leaf_attributes(ast);
  for (std::size_t y = 0; y < 4; ++y) {
    const Scalar& share = bt.sharing.leaf_shares[y];
    CHECK(em.leaves[y].c == g2.pow(share));
    CHECK(em.leaves[y].attribute == attribute_element(attrs[y]));
    CHECK(em.leaves[y].c_prime == attribute_element(attrs[y]).pow(share));
  }

  const auto msg = bytes("attack at dawn");
  EncryptTrace et;
  const auto ct = em_encrypt(f.kp.pk, em, msg, f.rng, &et);
  const Scalar st = (em.root_secret + et.delta) * et.t;
  CHECK(ct.c_tilde == et.payload_key * f.kp.pk.egg_alpha.pow(st));
  CHECK(ct.c1 == g1.pow(f.st.beta * st));
  CHECK(ct.c0 == g1.pow(f.st.q * et.x * hash_message(msg)));
  for (std::size_t y = 0; y < 4; ++y) {
    const Scalar shifted = (bt.sharing.leaf_shares[y] + et.delta) * et.t;
    CHECK(ct.leaves[y].c == g2.pow(shifted));
    CHECK(ct.leaves[y].c_prime == attribute_element(attrs[y]).pow(shifted));
  }

  const auto opened = decrypt_opened(f.kp.pk, f.key({"B", "C", "D"}), ct);
  CHECK(opened.message == msg);
  CHECK(opened.witness == g1.pow(et.x));
  CHECK(verify_m(f.kp.pk, ct, msg, opened.witness));
  CHECK_FALSE(verify_m(f.kp.pk, ct, bytes("attack at dusk"), opened.witness));
  CHECK_FALSE(verify_m(f.kp.pk, ct, msg, opened.witness * g1));
}

TEST_CASE("machine reuse yields independent ciphertexts") {
  Fixture f;
  const auto em = build_em(f.kp.pk, policy::parse_policy("A or B"), f.rng);
  const auto msg = bytes("same");
  const auto a = em_encrypt(f.kp.pk, em, msg, f.rng);
  const auto b = em_encrypt(f.kp.pk, em, msg, f.rng);
  CHECK_FALSE(a.c_tilde == b.c_tilde);
  CHECK_FALSE(a.c0 == b.c0);
  CHECK_FALSE(a.c1 == b.c1);
  for (std::size_t y = 0; y < 2; ++y) {
    CHECK_FALSE(a.leaves[y].c == b.leaves[y].c);
    CHECK_FALSE(a.leaves[y].c_prime == b.leaves[y].c_prime);
  }
  CHECK(a.dem != b.dem);
  const auto sk = f.key({"B"});
  CHECK(decrypt(f.kp.pk, sk, a) == msg);
  CHECK(decrypt(f.kp.pk, sk, b) == msg);
}

TEST_CASE("round trips over random trees and message sizes") {
  Fixture f;
  for (int i = 0; i < 40; ++i) {
    const std::size_t levels = 1 + bench::uniform(f.rng, 4);
    const std::size_t leaves = levels == 1 ? 1 : levels + bench::uniform(f.rng, 17 - levels);
    const auto tree = bench::gen_random_tree(levels, leaves, f.rng);
    const std::size_t size = i == 0 ? 0 : bench::uniform(f.rng, 4096);
    const auto msg = testing::random_bytes(f.rng, size);
    const auto ct = encrypt(f.kp.pk, tree.ast, msg, f.rng);
    const std::vector<std::string> attrs(tree.satisfying.begin(), tree.satisfying.end());
    CHECK(decrypt(f.kp.pk, f.key(attrs), ct) == msg);
  }
}

TEST_CASE("unsatisfied keys and collusion") {
  Fixture f;
  const auto ct = encrypt(f.kp.pk, policy::parse_policy("(A and B) or C"), bytes("m"), f.rng);
  CHECK(kind_of([&] { decrypt(f.kp.pk, f.key({"A"}), ct); }) == ErrorKind::Unsatisfied);
  CHECK(kind_of([&] { decrypt(f.kp.pk, f.key({"B", "D"}), ct); }) == ErrorKind::Unsatisfied);

  // Two users pooling components from different keys do not decrypt.
  const auto a = f.key({"A"});
  const auto b = f.key({"B"});
  SecretKey pooled = a;
  pooled.components.push_back(b.components[0]);
  CHECK(kind_of([&] { decrypt(f.kp.pk, pooled, ct); }) == ErrorKind::Authentication);
}

TEST_CASE("tampering with any ciphertext component is detected") {
  Fixture f;
  const auto ct = encrypt(f.kp.pk, policy::parse_policy("2 of (A, B, C)"), bytes("payload"), f.rng);
  const auto sk = f.key({"A", "B"});
  const auto g1 = LeftElement::generator();
  const auto g2 = RightElement::generator();
  const auto rejected = [&](const Ciphertext& bad) {
    const ErrorKind k = kind_of([&] { decrypt(f.kp.pk, sk, bad); });
    return k == ErrorKind::Authentication || k == ErrorKind::Verification;
  };
  {
    auto bad = ct;
    bad.c_tilde = bad.c_tilde * TargetElement::generator();
    CHECK(rejected(bad));
  }
  {
    auto bad = ct;
    bad.c0 = bad.c0 * g1;
    CHECK(rejected(bad));
  }
  {
    auto bad = ct;
    bad.c1 = bad.c1 * g1;
    CHECK(rejected(bad));
  }
  for (std::size_t y = 0; y < 3; ++y) {  // including the unused leaf C
    auto c = ct;
    c.leaves[y].c = c.leaves[y].c * g2;
    CHECK(rejected(c));
    auto cp = ct;
    cp.leaves[y].c_prime = cp.leaves[y].c_prime * g1;
    CHECK(rejected(cp));
  }
  for (std::size_t i : {std::size_t{0}, std::size_t{20}, ct.dem.size() - 1}) {
    auto bad = ct;
    bad.dem[i] ^= 0x01;
    CHECK(rejected(bad));
  }
  {
    auto bad = ct;
    bad.tree = policy::parse_policy("1 of (A, B, C)");
    CHECK(rejected(bad));
  }
}

TEST_CASE("inconsistent shapes are usage or decode errors") {
  Fixture f;
  auto em = build_em(f.kp.pk, policy::parse_policy("A and B"), f.rng);
  em.leaves.pop_back();
  CHECK(kind_of([&] { em_encrypt(f.kp.pk, em, bytes("x"), f.rng); }) == ErrorKind::Usage);

  auto ct = encrypt(f.kp.pk, policy::parse_policy("A and B"), bytes("x"), f.rng);
  ct.leaves.pop_back();
  CHECK(kind_of([&] { decrypt(f.kp.pk, f.key({"A", "B"}), ct); }) == ErrorKind::Decode);
  CHECK(kind_of([&] { build_em(f.kp.pk, policy::PolicyAst::gate(3, {}), f.rng); }) == ErrorKind::Usage);
}

TEST_CASE("one key component cannot open another attribute's leaf") {
  // With H_a(x) = g1^{h(x)} for a public h, C'_y^{1/h(y)} = g1^{q_y t} and a
  // component for A would yield e(g,g)^{r q_y t} for any leaf y.
  Fixture f;
  KeygenTrace kt;
  const auto a = f.key({"A"}, &kt);
  const auto ct = encrypt(f.kp.pk, policy::parse_policy("A and B"), bytes("m"), f.rng);
  auto h = [](std::string_view x) {
    return Scalar::hash_to(domain::kAttributeHash, std::span(reinterpret_cast<const std::uint8_t*>(x.data()), x.size()));
  };
  CHECK_FALSE(attribute_element("B") == LeftElement::generator().pow(h("B")));

  const auto& leaf_b = ct.leaves[1];
  const auto& comp = a.components[0];
  const auto g1_qt = leaf_b.c_prime.pow(h("B").inverse());
  const auto attempt = pair(comp.d, leaf_b.c) / pair(g1_qt, comp.d_prime).pow(h("A"));
  const auto honest = pair(LeftElement::generator().pow(kt.r), leaf_b.c);
  CHECK_FALSE(attempt == honest);
}
