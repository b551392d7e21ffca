// Acceptance run: one PASS/FAIL line per criterion. Optional arguments
// select criteria by name.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "abem/bench.hpp"
#include "abem/codec.hpp"
#include "abem/errors.hpp"
#include "abem/outsource.hpp"
#include "abem/proxy.hpp"
#include "abem/scheme.hpp"
#include "proxy_corpus.hpp"

using namespace abem;
using Bytes = std::vector<std::uint8_t>;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Collects the first few failure reasons.
class Tally {
 public:
  void expect(bool cond, const std::string& what) {
    ++checks_;
    if (cond) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  Outcome outcome(const std::string& summary) const {
    if (failures_ == 0) return {true, summary + ", " + std::to_string(checks_) + " checks"};
    return {false, std::to_string(failures_) + "/" + std::to_string(checks_) + " failed: " + notes_};
  }

 private:
  std::size_t checks_ = 0, failures_ = 0;
  std::string notes_;
};

std::uint64_t uniform(RandomSource& rng, std::uint64_t bound) { return bench::uniform(rng, bound); }

Bytes random_bytes(RandomSource& rng, std::size_t n) {
  Bytes out(n);
  rng.fill(out);
  return out;
}

std::optional<ErrorKind> kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

double elapsed(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// Independent threshold evaluator.
bool holds(const policy::PolicyAst& n, const policy::AttributeSet& attrs) {
  if (n.is_leaf()) return attrs.count(n.attribute) > 0;
  std::uint32_t got = 0;
  for (const auto& c : n.children) got += holds(c, attrs) ? 1 : 0;
  return got >= n.threshold;
}

// Random small tree: depth <= 4, <= 16 leaves.
bench::RandomTree small_tree(RandomSource& rng) {
  const std::size_t levels = 1 + uniform(rng, 4);
  const std::size_t leaves = levels == 1 ? 1 : levels + uniform(rng, 16 - levels + 1);
  return bench::gen_random_tree(levels, leaves, rng);
}

std::vector<std::string> with_decoys(const policy::AttributeSet& s, RandomSource& rng) {
  std::vector<std::string> out(s.begin(), s.end());
  for (std::uint64_t i = uniform(rng, 3); i > 0; --i) out.push_back("decoy" + std::to_string(uniform(rng, 100)));
  if (out.empty()) out.push_back("decoy");
  return out;
}

// Attributes of the tree removed one at a time until the tree fails.
policy::AttributeSet unsatisfying(const bench::RandomTree& t, RandomSource& rng) {
  policy::AttributeSet s = t.satisfying;
  for (const auto& a : policy::leaf_attributes(t.ast)) {
    if (uniform(rng, 2) == 0) s.insert(a);
  }
  while (holds(t.ast, s)) {
    auto it = s.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(uniform(rng, s.size())));
    s.erase(it);
  }
  return s;
}

struct World {
  SeededRandom rng;
  KeyPair kp;
  explicit World(std::uint64_t seed) : rng(seed), kp(setup(rng)) {}
};

Outcome round_trip() {
  World w(1001);
  Tally tally;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 200; ++i) {
    const auto tree = small_tree(w.rng);
    const auto sk = keygen(w.kp.pk, w.kp.mk, with_decoys(tree.satisfying, w.rng), w.rng);
    const auto em = build_em(w.kp.pk, tree.ast, w.rng);
    // Two messages per machine exercise reuse.
    for (int j = 0; j < 2; ++j) {
      const auto msg = random_bytes(w.rng, uniform(w.rng, 64 * 1024 + 1));
      const auto ct = em_encrypt(w.kp.pk, em, msg, w.rng);
      std::optional<Bytes> got;
      try {
        got = decrypt(w.kp.pk, sk, ct);
      } catch (const Error& e) {
        tally.expect(false, tree.text + ": " + e.what());
        continue;
      }
      tally.expect(got == msg, "wrong plaintext for " + tree.text);
    }
  }
  const double secs = elapsed(start);
  tally.expect(secs < 60.0, "took " + std::to_string(secs) + " s");
  std::ostringstream s;
  s << "400 encryptions over 200 trees in " << secs << " s";
  return tally.outcome(s.str());
}

Outcome negative_correctness() {
  World w(1002);
  Tally tally;
  for (int i = 0; i < 200; ++i) {
    const auto tree = small_tree(w.rng);
    const auto attrs = unsatisfying(tree, w.rng);
    const auto sk = keygen(w.kp.pk, w.kp.mk, with_decoys(attrs, w.rng), w.rng);
    const auto ct = encrypt(w.kp.pk, tree.ast, random_bytes(w.rng, uniform(w.rng, 4096)), w.rng);
    const auto k = kind_of([&] { (void)decrypt(w.kp.pk, sk, ct); });
    tally.expect(k == ErrorKind::Unsatisfied, "no unsatisfied outcome for " + tree.text);
    const auto pair = gen_tk(w.kp.pk, sk, w.rng);
    tally.expect(!transform(pair.tk, ct).has_value(), "transform succeeded for " + tree.text);
  }
  return tally.outcome("200 non-satisfying keys");
}

Outcome outsourcing_equivalence() {
  World w(1003);
  Tally tally;
  proxy::TransformServer server("127.0.0.1:0", {});
  server.start();
  const std::string addr = "127.0.0.1:" + std::to_string(server.port());
  for (int i = 0; i < 200; ++i) {
    const auto tree = small_tree(w.rng);
    const auto sk = keygen(w.kp.pk, w.kp.mk, with_decoys(tree.satisfying, w.rng), w.rng);
    const auto pair = gen_tk(w.kp.pk, sk, w.rng);
    const auto ct = encrypt(w.kp.pk, tree.ast, random_bytes(w.rng, uniform(w.rng, 16 * 1024)), w.rng);
    const auto direct = decrypt(w.kp.pk, sk, ct);
    const auto local = transform(pair.tk, ct);
    const auto remote = proxy::client_transform(addr, pair.tk, ct);
    if (!local || !remote) {
      tally.expect(false, "no partial for " + tree.text);
      continue;
    }
    tally.expect(recover(w.kp.pk, pair.rk, ct, *local) == direct, "local mismatch");
    tally.expect(recover(w.kp.pk, pair.rk, ct, *remote) == direct, "remote mismatch");
  }
  server.stop();
  return tally.outcome("200 instances, local and loopback proxy");
}

Outcome verification_soundness() {
  World w(1004);
  Tally tally;
  auto rejected = [](const std::optional<ErrorKind>& k) {
    return k == ErrorKind::Verification || k == ErrorKind::Authentication;
  };

  // Byzantine proxy, half in process and half over loopback.
  proxy::ServerOptions opts;
  opts.byzantine_seed = 7;
  proxy::TransformServer server("127.0.0.1:0", opts);
  server.start();
  const std::string addr = "127.0.0.1:" + std::to_string(server.port());
  for (int i = 0; i < 100; ++i) {
    const auto tree = small_tree(w.rng);
    const auto sk = keygen(w.kp.pk, w.kp.mk, with_decoys(tree.satisfying, w.rng), w.rng);
    const auto pair = gen_tk(w.kp.pk, sk, w.rng);
    const auto ct = encrypt(w.kp.pk, tree.ast, random_bytes(w.rng, uniform(w.rng, 2048)), w.rng);
    PartialDecryption bad;
    if (i % 2 == 0) {
      bad = *transform(pair.tk, ct);
      bad.t = bad.t * TargetElement::random(w.rng);
    } else {
      bad = *proxy::client_transform(addr, pair.tk, ct);
    }
    tally.expect(rejected(kind_of([&] { (void)recover(w.kp.pk, pair.rk, ct, bad); })),
                 "perturbed T accepted");
  }
  server.stop();

  // One component of the ciphertext changed; both decryption paths must refuse.
  const char* classes[] = {"c_tilde", "c0", "dem", "leaf c", "leaf c'"};
  for (int i = 0; i < 100; ++i) {
    const auto tree = small_tree(w.rng);
    const auto sk = keygen(w.kp.pk, w.kp.mk, with_decoys(tree.satisfying, w.rng), w.rng);
    const auto pair = gen_tk(w.kp.pk, sk, w.rng);
    auto ct = encrypt(w.kp.pk, tree.ast, random_bytes(w.rng, 1 + uniform(w.rng, 2048)), w.rng);
    const int which = i % 5;
    const auto leaf = uniform(w.rng, ct.leaves.size());
    const auto e = Scalar::random_nonzero(w.rng);
    switch (which) {
      case 0: ct.c_tilde = ct.c_tilde * TargetElement::generator().pow(e); break;
      case 1: ct.c0 = ct.c0 * LeftElement::generator().pow(e); break;
      case 2: ct.dem[uniform(w.rng, ct.dem.size())] ^= static_cast<std::uint8_t>(1 + uniform(w.rng, 255)); break;
      case 3: ct.leaves[leaf].c = ct.leaves[leaf].c * RightElement::generator().pow(e); break;
      case 4: ct.leaves[leaf].c_prime = ct.leaves[leaf].c_prime * LeftElement::generator().pow(e); break;
    }
    const std::string label = std::string(classes[which]) + " mutation";
    tally.expect(rejected(kind_of([&] { (void)decrypt(w.kp.pk, sk, ct); })), label + " decrypted");
    const auto partial = transform(pair.tk, ct);
    tally.expect(partial.has_value(), label + " lost the partial");
    if (partial) {
      tally.expect(rejected(kind_of([&] { (void)recover(w.kp.pk, pair.rk, ct, *partial); })),
                   label + " recovered");
    }
  }
  return tally.outcome("100 perturbed partials, 100 mutated ciphertexts");
}

Scalar lagrange(std::uint32_t i, const std::vector<std::uint32_t>& set) {
  Scalar num = Scalar::from_u64(1), den = Scalar::from_u64(1);
  for (std::uint32_t j : set) {
    if (j == i) continue;
    num *= -Scalar::from_u64(j);
    den *= Scalar::from_u64(i) - Scalar::from_u64(j);
  }
  return num * den.inverse();
}

// Interpolates every gate from a random k-subset of its children and
// records the value of every node in preorder.
Scalar interpolate(const policy::PolicyAst& n, const std::vector<Scalar>& leaf_values,
                   std::size_t& next_leaf, std::vector<Scalar>& out, RandomSource& rng) {
  const std::size_t slot = out.size();
  out.emplace_back();
  if (n.is_leaf()) return out[slot] = leaf_values[next_leaf++];
  std::vector<Scalar> child_values;
  for (const auto& c : n.children) child_values.push_back(interpolate(c, leaf_values, next_leaf, out, rng));
  std::vector<std::uint32_t> idx(n.children.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i + 1);
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform(rng, i)]);
  idx.resize(n.threshold);
  Scalar v;
  for (std::uint32_t i : idx) v += lagrange(i, idx) * child_values[i - 1];
  return out[slot] = v;
}

Outcome share_shift() {
  SeededRandom rng(1005);
  Tally tally;
  for (int i = 0; i < 500; ++i) {
    const auto tree = small_tree(rng);
    const auto shared = policy::share_secret(tree.ast, Scalar::random(rng), rng);
    const auto delta = Scalar::random(rng);
    std::vector<Scalar> shifted;
    for (const auto& s : shared.leaf_shares) shifted.push_back(s + delta);

    std::vector<Scalar> plain_nodes, shifted_nodes;
    std::size_t a = 0, b = 0;
    interpolate(tree.ast, shared.leaf_shares, a, plain_nodes, rng);
    interpolate(tree.ast, shifted, b, shifted_nodes, rng);
    bool ok = plain_nodes.size() == shared.node_values.size();
    for (std::size_t k = 0; ok && k < plain_nodes.size(); ++k) {
      ok = plain_nodes[k] == shared.node_values[k] && shifted_nodes[k] == shared.node_values[k] + delta;
    }
    tally.expect(ok, "shift not preserved on " + tree.text);

    const auto assignment = policy::find_satisfying(tree.ast, tree.satisfying);
    std::map<std::size_t, Scalar> leaf_map;
    for (std::size_t k = 0; k < shifted.size(); ++k) leaf_map[k] = shifted[k];
    tally.expect(assignment && policy::reconstruct(leaf_map, *assignment) == shared.secret + delta,
                 "library reconstruction off on " + tree.text);
  }
  return tally.outcome("500 trees, every node");
}

// Random tree over a small attribute pool, so attributes may repeat.
policy::PolicyAst pooled_tree(RandomSource& rng, std::size_t depth, std::size_t& budget) {
  if (depth == 1 || budget <= 1 || uniform(rng, 3) == 0) {
    if (budget > 0) --budget;
    return policy::PolicyAst::leaf("p" + std::to_string(uniform(rng, 6)));
  }
  std::vector<policy::PolicyAst> kids;
  const std::size_t n = 1 + uniform(rng, std::min<std::size_t>(budget, 4));
  for (std::size_t i = 0; i < n && budget > 0; ++i) kids.push_back(pooled_tree(rng, depth - 1, budget));
  const auto k = 1 + static_cast<std::uint32_t>(uniform(rng, kids.size()));
  return policy::PolicyAst::gate(k, std::move(kids));
}

Outcome brute_force() {
  SeededRandom rng(1006);
  Tally tally;
  std::size_t subsets = 0;
  for (int i = 0; i < 120; ++i) {
    policy::PolicyAst ast;
    if (i % 2 == 0) {
      const std::size_t levels = 1 + uniform(rng, 4);
      const std::size_t leaves = levels == 1 ? 1 : levels + uniform(rng, 10 - levels + 1);
      ast = bench::gen_random_tree(levels, leaves, rng).ast;
    } else {
      std::size_t budget = 10;
      ast = pooled_tree(rng, 4, budget);
    }
    policy::validate(ast);
    const auto attrs = policy::leaf_attributes(ast);
    const policy::AttributeSet universe(attrs.begin(), attrs.end());
    const std::vector<std::string> pool(universe.begin(), universe.end());
    // Every subset of the leaf attributes (at most 2^10).
    for (std::uint32_t mask = 0; mask < (1u << pool.size()); ++mask) {
      policy::AttributeSet s;
      for (std::size_t b = 0; b < pool.size(); ++b) {
        if (mask & (1u << b)) s.insert(pool[b]);
      }
      const auto found = policy::find_satisfying(ast, s);
      bool consistent = found.has_value() == holds(ast, s);
      if (found) {
        for (const auto& [ordinal, attr] : found->leaves) {
          consistent = consistent && s.count(attr) && attrs[ordinal] == attr;
        }
      }
      tally.expect(consistent, "disagreement on " + policy::to_string(ast));
      ++subsets;
    }
  }
  return tally.outcome("120 trees, " + std::to_string(subsets) + " subsets");
}

std::vector<Bytes> fresh_objects(RandomSource& rng) {
  const auto kp = setup(rng);
  const auto tree = small_tree(rng);
  const auto sk = keygen(kp.pk, kp.mk, with_decoys(tree.satisfying, rng), rng);
  const auto pair = gen_tk(kp.pk, sk, rng);
  const auto em = build_em(kp.pk, tree.ast, rng);
  const auto ct = em_encrypt(kp.pk, em, random_bytes(rng, uniform(rng, 512)), rng);
  return {codec::encode(kp.pk),    codec::encode(kp.mk),      codec::encode(sk),
          codec::encode(em),       codec::encode(ct),         codec::encode(pair.tk),
          codec::encode(pair.rk),  codec::encode(*transform(pair.tk, ct))};
}

Bytes reencode(std::span<const std::uint8_t> b) {
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

Outcome properties() {
  SeededRandom rng(1007);
  Tally tally;
  const auto g1 = LeftElement::generator();
  const auto g2 = RightElement::generator();
  for (int i = 0; i < 100; ++i) {
    const auto a = Scalar::random(rng), b = Scalar::random(rng), c = Scalar::random(rng);
    tally.expect(pair(g1.pow(a), g2.pow(b)) == TargetElement::generator().pow(a * b), "e(g^a,g^b) != e(g,g)^ab");
    tally.expect(pair(g1.pow(a) * g1.pow(c), g2.pow(b)) == pair(g1.pow(a), g2.pow(b)) * pair(g1.pow(c), g2.pow(b)),
                 "not linear in the left argument");
    const auto m = MirroredElement::from_exponent(a);
    tally.expect(m.consistent(), "mirror inconsistent");
    MirroredElement skew = m;
    skew.right = g2.pow(b);
    tally.expect(a == b || !skew.consistent(), "skewed mirror accepted");
  }
  for (int i = 0; i < 20; ++i) {
    const auto kp = setup(rng);
    tally.expect(kp.pk.g.consistent() && kp.pk.gq.consistent(), "public key mirrors inconsistent");
  }

  std::size_t objects = 0;
  for (int i = 0; i < 1000; ++i) {
    for (const auto& b : fresh_objects(rng)) {
      ++objects;
      std::optional<Bytes> again;
      try {
        again = reencode(b);
      } catch (const Error& e) {
        tally.expect(false, std::string("round trip threw: ") + e.what());
        continue;
      }
      tally.expect(again == b, "round trip changed bytes");
      tally.expect(codec::dearmor(codec::armor(b)) == b, "armor round trip");
      auto m = b;
      m[uniform(rng, m.size())] ^= static_cast<std::uint8_t>(1 + uniform(rng, 255));
      std::optional<Bytes> mutated;
      try {
        mutated = reencode(m);
      } catch (const DecodeError&) {
      }
      tally.expect(!mutated || *mutated == m, "mutation decoded to a different object");
    }
  }
  return tally.outcome("100 bilinearity checks, " + std::to_string(objects) + " codec objects");
}

bool within_noise(const bench::BenchRecord& a, const bench::BenchRecord& b, double allowed) {
  return b.mean_s <= a.mean_s + 2 * std::sqrt(a.std_s * a.std_s + b.std_s * b.std_s) + allowed;
}

std::string table(const std::vector<bench::BenchRecord>& r) {
  std::ostringstream s;
  s.precision(4);
  for (const auto& x : r) s << " " << x.scheme << "@" << x.parameter << "=" << x.mean_s * 1e3 << "ms";
  return s.str();
}

Outcome amortization() {
  SeededRandom rng(1008);
  const auto kp = setup(rng);
  bench::BenchConfig cfg;  // 10 levels, 100 leaves, 5 reps
  const std::vector<std::size_t> counts{1, 2, 5, 10, 25, 50, 100};
  const auto rec = bench::reuse_sweep(kp.pk, cfg, counts);
  std::vector<bench::BenchRecord> fresh, em;
  for (const auto& r : rec) (r.scheme == "em" ? em : fresh).push_back(r);
  Tally tally;
  tally.expect(em.back().mean_s < 0.95 * fresh.back().mean_s, "em not below 0.95x fresh at N=100");
  for (std::size_t i = 0; i + 1 < em.size(); ++i) {
    tally.expect(within_noise(em[i], em[i + 1], 0), "em rises from N=" + std::to_string(em[i].parameter));
  }
  for (const auto& r : rec) tally.expect(r.reps >= 5 && r.mean_s > 0, "bad record");
  std::ostringstream s;
  s.precision(3);
  s << "em/fresh at N=100 " << em.back().mean_s / fresh.back().mean_s << ";" << table(em);
  return tally.outcome(s.str());
}

Outcome size_sweep() {
  SeededRandom rng(1009);
  const auto kp = setup(rng);
  bench::BenchConfig cfg;
  cfg.reps = 10;
  const std::vector<std::size_t> sizes{1u << 20, 16u << 20, 64u << 20};
  const auto rec = bench::size_sweep(kp.pk, cfg, sizes);
  struct Gap {
    double mean, std;
  };
  std::vector<Gap> gaps;
  for (std::size_t i = 0; i + 1 < rec.size(); i += 2) {
    const auto& f = rec[i];
    const auto& e = rec[i + 1];
    gaps.push_back({f.mean_s - e.mean_s, std::sqrt(f.std_s * f.std_s + e.std_s * e.std_s)});
  }
  Tally tally;
  std::ostringstream s;
  s.precision(4);
  s << "gaps";
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    s << " " << (sizes[i] >> 20) << "MiB=" << gaps[i].mean * 1e3 << "+-" << gaps[i].std * 1e3 << "ms";
    tally.expect(gaps[i].mean > 0, "fresh not slower at " + std::to_string(sizes[i] >> 20) + " MiB");
    for (std::size_t j = 0; j < i; ++j) {
      const double bound = 2 * std::sqrt(gaps[i].std * gaps[i].std + gaps[j].std * gaps[j].std);
      tally.expect(std::abs(gaps[i].mean - gaps[j].mean) <= bound,
                   "gap differs between " + std::to_string(sizes[j] >> 20) + " and " +
                       std::to_string(sizes[i] >> 20) + " MiB");
    }
  }
  return tally.outcome(s.str());
}

Outcome protocol() {
  World w(1010);
  Tally tally;
  for (const auto& g : corpus::golden_frames()) {
    tally.expect(proxy::encode_frame(g.frame) == g.wire, "encode " + g.name);
    tally.expect(proxy::decode_frame(g.wire) == g.frame, "decode " + g.name);
  }
  const std::vector<std::string> attrs{"A", "B"};
  const auto sk = keygen(w.kp.pk, w.kp.mk, attrs, w.rng);
  const auto pair = gen_tk(w.kp.pk, sk, w.rng);
  const auto ct = encrypt(w.kp.pk, policy::parse_policy("A and B"), Bytes{1, 2, 3}, w.rng);
  const auto cases = corpus::malformed_frames(codec::encode(pair.tk), codec::encode(ct), codec::encode(sk),
                                              codec::encode(w.kp.mk), codec::encode(pair.rk));
  tally.expect(cases.size() >= 20, "corpus too small");
  proxy::TransformServer server("127.0.0.1:0", {});
  server.start();
  const std::string addr = "127.0.0.1:" + std::to_string(server.port());
  for (const auto& c : cases) {
    try {
      const auto frame = proxy::decode_frame(proxy::exchange_raw(addr, c.stream, std::chrono::seconds(10)));
      tally.expect(frame.type == 0xFF && proxy::decode_error(frame.body).first == c.code, c.name);
    } catch (const Error& e) {
      tally.expect(false, c.name + ": " + e.what());
    }
  }
  server.stop();
  return tally.outcome(std::to_string(corpus::golden_frames().size()) + " golden frames, " +
                       std::to_string(cases.size()) + " malformed frames");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"round-trip-correctness", round_trip},
      {"negative-correctness", negative_correctness},
      {"outsourcing-equivalence", outsourcing_equivalence},
      {"verification-soundness", verification_soundness},
      {"share-shift-homomorphism", share_shift},
      {"brute-force-oracle", brute_force},
      {"bilinearity-mirror-codec", properties},
      {"amortization-trend", amortization},
      {"size-sweep-shape", size_sweep},
      {"protocol-conformance", protocol},
  };
  const std::vector<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.ok) ++failed;
    std::cout << (o.ok ? "PASS " : "FAIL ") << name << " (" << o.detail << "; " << elapsed(start) << " s)"
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
