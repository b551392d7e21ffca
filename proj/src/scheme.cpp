#include "abem/scheme.hpp"

#include <algorithm>
#include <map>

#include "abem/dem.hpp"
#include "abem/errors.hpp"

namespace abem {

using policy::PolicyAst;

policy::AttributeSet SecretKey::attributes() const {
  policy::AttributeSet out;
  for (const auto& c : components) out.insert(c.attribute);
  return out;
}

const KeyComponent* SecretKey::find(std::string_view attribute) const {
  const auto it = std::lower_bound(
      components.begin(), components.end(), attribute,
      [](const KeyComponent& c, std::string_view a) { return c.attribute < a; });
  return it != components.end() && it->attribute == attribute ? &*it : nullptr;
}

namespace detail {

void check_curve(CurveId expected, CurveId actual, std::string_view what) {
  if (expected != actual) {
    throw Error(ErrorKind::Usage, std::string(what) + " was made for curve '" +
                                      std::string(curve_name(actual)) + "', expected '" +
                                      std::string(curve_name(expected)) + "'");
  }
}

std::optional<TargetElement> unwrap(const Ciphertext& ct, const RightElement& root_key,
                                    std::span<const KeyComponent> components) {
  if (ct.leaves.size() != policy::leaf_count(ct.tree)) {
    throw DecodeError(DecodeFailure::Malformed, "leaf count does not match the access tree");
  }
  std::map<std::string_view, const KeyComponent*> by_attr;
  policy::AttributeSet attrs;
  for (const auto& c : components) {
    by_attr.emplace(c.attribute, &c);
    attrs.insert(c.attribute);
  }
  const auto assignment = policy::find_satisfying(ct.tree, attrs);
  if (!assignment) return std::nullopt;

  // The recursive combination F_x = prod F_z^{Delta} is carried out in the
  // exponent: each used leaf's pairing ratio is raised to the product of the
  // Lagrange coefficients on its path, which lets every pairing share one
  // final exponentiation.
  std::vector<std::pair<LeftElement, RightElement>> terms;
  for (const auto& [ordinal, coefficient] : policy::leaf_coefficients(*assignment)) {
    const KeyComponent& key = *by_attr.at(assignment->leaves.at(ordinal));
    const LeafComponents& leaf = ct.leaves[ordinal];
    terms.emplace_back(key.d.pow(coefficient), leaf.c);
    terms.emplace_back(leaf.c_prime.pow(-coefficient), key.d_prime);
  }
  terms.emplace_back(ct.c1.inverse(), root_key);
  return ct.c_tilde * pair_product(terms);
}

}  // namespace detail

KeyPair setup(RandomSource& rng, CurveId curve, SetupTrace* trace) {
  const Scalar alpha = Scalar::random(rng);
  const Scalar beta = Scalar::random_nonzero(rng);
  const Scalar q = Scalar::random(rng);

  KeyPair out;
  out.pk.curve = curve;
  out.pk.g = MirroredElement::generator();
  out.pk.h = LeftElement::generator().pow(beta);
  out.pk.egg_alpha = TargetElement::generator().pow(alpha);
  out.pk.gq = MirroredElement::from_exponent(q);
  out.pk.gq.log.reset();

  out.mk.curve = curve;
  out.mk.beta = beta;
  out.mk.g_alpha = RightElement::generator().pow(alpha);
  out.mk.q = q;

  if (trace != nullptr) *trace = SetupTrace{alpha, beta, q};
  return out;
}

SecretKey keygen(const PublicKey& pk, const MasterKey& mk,
                 std::span<const std::string> attributes, RandomSource& rng,
                 KeygenTrace* trace) {
  detail::check_curve(pk.curve, mk.curve, "master key");
  const policy::AttributeSet attrs = policy::make_attribute_set(attributes);
  if (attrs.empty()) throw Error(ErrorKind::Usage, "empty attribute set");

  const Scalar r = Scalar::random(rng);
  const RightElement g2 = pk.g.right;
  const LeftElement g1r = pk.g.left.pow(r);

  SecretKey sk;
  sk.curve = pk.curve;
  sk.d = (mk.g_alpha * g2.pow(r)).pow(mk.beta.inverse());

  KeygenTrace local;
  local.r = r;
  for (const auto& attr : attrs) {  // std::set iterates sorted
    const Scalar rj = Scalar::random(rng);
    sk.components.push_back({attr, g1r * attribute_element(attr).pow(rj), g2.pow(rj)});
    local.r_j.push_back(rj);
  }
  if (trace != nullptr) *trace = std::move(local);
  return sk;
}

EncryptionMachine build_em(const PublicKey& pk, const PolicyAst& policy,
                           RandomSource& rng, BuildTrace* trace) {
  policy::validate(policy);

  EncryptionMachine em;
  em.curve = pk.curve;
  em.tree = policy;
  em.root_secret = Scalar::random(rng);
  policy::SharedTree shared = policy::share_secret(policy, em.root_secret, rng);

  const auto attrs = policy::leaf_attributes(policy);
  std::map<std::string, LeftElement> cache;
  em.leaves.reserve(attrs.size());
  for (std::size_t y = 0; y < attrs.size(); ++y) {
    auto it = cache.find(attrs[y]);
    if (it == cache.end()) it = cache.emplace(attrs[y], attribute_element(attrs[y])).first;
    const Scalar& share = shared.leaf_shares[y];
    em.leaves.push_back({pk.g.right.pow(share), it->second.pow(share), it->second});
  }
  if (trace != nullptr) trace->sharing = std::move(shared);
  return em;
}

Ciphertext em_encrypt(const PublicKey& pk, const EncryptionMachine& em,
                      std::span<const std::uint8_t> message, RandomSource& rng,
                      EncryptTrace* trace) {
  detail::check_curve(pk.curve, em.curve, "encryption machine");
  if (em.leaves.size() != policy::leaf_count(em.tree)) {
    throw Error(ErrorKind::Usage, "encryption machine leaf count does not match its tree");
  }

  const Scalar x = Scalar::random_nonzero(rng);
  const Scalar t = Scalar::random_nonzero(rng);
  const Scalar delta = Scalar::random(rng);
  const Scalar st = (em.root_secret + delta) * t;
  const TargetElement payload_key = TargetElement::random(rng);

  Ciphertext ct;
  ct.curve = pk.curve;
  ct.tree = em.tree;
  ct.c_tilde = payload_key * pk.egg_alpha.pow(st);
  ct.c1 = pk.h.pow(st);
  // u^{H_m(M) q} computed from public g^q since u = g1^x.
  ct.c0 = pk.gq.left.pow(x * hash_message(message));

  // q_y(0) + delta per leaf, then scaled by t.
  const RightElement g_delta = pk.g.right.pow(delta);
  ct.leaves.reserve(em.leaves.size());
  for (const EmLeaf& leaf : em.leaves) {
    ct.leaves.push_back({(leaf.c * g_delta).pow(t),
                         (leaf.c_prime * leaf.attribute.pow(delta)).pow(t)});
  }

  const LeftElement u = pk.g.left.pow(x);
  ct.dem = dem::seal(payload_key, detail::header_bytes(ct), message, u, rng);

  if (trace != nullptr) *trace = EncryptTrace{x, t, delta, payload_key};
  return ct;
}

Ciphertext encrypt(const PublicKey& pk, const PolicyAst& policy,
                   std::span<const std::uint8_t> message, RandomSource& rng) {
  return em_encrypt(pk, build_em(pk, policy, rng), message, rng);
}

Opened decrypt_opened(const PublicKey& pk, const SecretKey& sk, const Ciphertext& ct) {
  detail::check_curve(pk.curve, sk.curve, "secret key");
  detail::check_curve(pk.curve, ct.curve, "ciphertext");

  const auto key = detail::unwrap(ct, sk.d, sk.components);
  if (!key) throw Error(ErrorKind::Unsatisfied, "attribute set does not satisfy the policy");

  dem::OpenResult opened = dem::open(*key, detail::header_bytes(ct), ct.dem);
  if (opened.status != dem::OpenStatus::Ok) {
    throw Error(ErrorKind::Authentication,
                opened.status == dem::OpenStatus::WrongKey
                    ? "ciphertext does not unwrap to its payload key"
                    : "payload failed authentication");
  }
  if (!verify_m(pk, ct, opened.message, opened.witness)) {
    throw Error(ErrorKind::Verification, "message does not match the verification tag");
  }
  return Opened{std::move(opened.message), opened.witness};
}

std::vector<std::uint8_t> decrypt(const PublicKey& pk, const SecretKey& sk,
                                  const Ciphertext& ct) {
  return decrypt_opened(pk, sk, ct).message;
}

bool verify_m(const PublicKey& pk, const Ciphertext& ct,
              std::span<const std::uint8_t> message, const LeftElement& witness) {
  const LeftElement lhs = witness.pow(hash_message(message));
  return pair(ct.c0, pk.g.right) == pair(lhs, pk.gq.right);
}

}  // namespace abem
