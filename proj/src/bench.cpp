#include "abem/bench.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>

#include "abem/errors.hpp"

namespace abem::bench {

using policy::PolicyAst;

std::uint64_t uniform(RandomSource& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    std::uint8_t b[8];
    rng.fill(b);
    std::uint64_t v = 0;
    for (std::uint8_t x : b) v = (v << 8) | x;
    if (v < limit) return v % bound;
  }
}

namespace {

void name_leaves(PolicyAst& n, std::size_t& next) {
  if (n.is_leaf()) {
    n.attribute = "attr" + std::to_string(next++);
    return;
  }
  for (auto& c : n.children) name_leaves(c, next);
}

void assign_thresholds(PolicyAst& n, RandomSource& rng) {
  if (n.is_leaf()) return;
  n.threshold = static_cast<std::uint32_t>(1 + uniform(rng, n.children.size()));
  for (auto& c : n.children) assign_thresholds(c, rng);
}

// k children drawn at random at every gate.
void pick_satisfying(const PolicyAst& n, RandomSource& rng, policy::AttributeSet& out) {
  if (n.is_leaf()) {
    out.insert(n.attribute);
    return;
  }
  std::vector<std::size_t> idx(n.children.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform(rng, i)]);
  for (std::uint32_t i = 0; i < n.threshold; ++i) pick_satisfying(n.children[idx[i]], rng, out);
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0;
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double seconds(const std::function<void()>& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::uint8_t> message_of(std::size_t bytes, RandomSource& rng) {
  std::vector<std::uint8_t> m(bytes);
  rng.fill(m);
  return m;
}

void check_config(const BenchConfig& c) {
  if (c.reps < 5) throw Error(ErrorKind::Usage, "benchmarks need at least 5 repetitions");
}

}  // namespace

RandomTree gen_random_tree(std::size_t levels, std::size_t leaves, RandomSource& rng) {
  if (levels == 0 || leaves == 0) throw Error(ErrorKind::Usage, "levels and leaves must be positive");
  if (levels > policy::kMaxDepth) {
    throw Error(ErrorKind::Usage, "depth exceeds " + std::to_string(policy::kMaxDepth));
  }
  if (leaves > policy::kMaxLeaves) {
    throw Error(ErrorKind::Usage, "leaf count exceeds " + std::to_string(policy::kMaxLeaves));
  }
  if (levels == 1 && leaves != 1) throw Error(ErrorKind::Usage, "a one-level tree has one leaf");
  if (levels >= 2 && leaves < levels) {
    throw Error(ErrorKind::Usage, "a tree of " + std::to_string(levels) + " levels needs at least " +
                                      std::to_string(levels) + " leaves");
  }

  PolicyAst root;
  if (levels == 1) {
    root = PolicyAst::leaf("attr0");
  } else {
    // Spine gates 0..g-1; gate i sits at depth i+1. The bottom gate needs two
    // leaves, every other gate one besides its spine child.
    const std::size_t gates = levels - 1;
    std::vector<std::size_t> leaf_slots(gates, 1);
    leaf_slots.back() = 2;
    for (std::size_t extra = leaves - levels; extra > 0; --extra) ++leaf_slots[uniform(rng, gates)];

    PolicyAst below;
    for (std::size_t g = gates; g-- > 0;) {
      std::vector<PolicyAst> children(leaf_slots[g], PolicyAst::leaf("x"));
      if (g + 1 < gates) {
        const std::size_t at = uniform(rng, children.size() + 1);
        children.insert(children.begin() + static_cast<std::ptrdiff_t>(at), std::move(below));
      }
      below = PolicyAst::gate(1, std::move(children));
    }
    root = std::move(below);
    assign_thresholds(root, rng);
    std::size_t next = 0;
    name_leaves(root, next);
  }

  RandomTree out;
  out.text = policy::to_string(root);
  out.ast = std::move(root);
  pick_satisfying(out.ast, rng, out.satisfying);
  return out;
}

std::vector<BenchRecord> size_sweep(const PublicKey& pk, const BenchConfig& config,
                                    std::span<const std::size_t> sizes) {
  check_config(config);
  SeededRandom rng(config.seed);
  const RandomTree tree = gen_random_tree(config.levels, config.leaves, rng);
  const EncryptionMachine em = build_em(pk, tree.ast, rng);

  std::vector<BenchRecord> out;
  for (std::size_t size : sizes) {
    const auto msg = message_of(size, rng);
    std::vector<double> fresh, reuse;
    // Repetitions alternate the two schemes so drift hits both alike.
    for (std::size_t rep = 0; rep <= config.reps; ++rep) {
      const double f = seconds([&] { (void)em_encrypt(pk, build_em(pk, tree.ast, rng), msg, rng); });
      const double e = seconds([&] { (void)em_encrypt(pk, em, msg, rng); });
      if (rep == 0) continue;  // warm-up
      fresh.push_back(f);
      reuse.push_back(e);
    }
    out.push_back({"size-sweep", size, "fresh", mean(fresh), stddev(fresh), fresh.size()});
    out.push_back({"size-sweep", size, "em", mean(reuse), stddev(reuse), reuse.size()});
  }
  return out;
}

std::vector<BenchRecord> reuse_sweep(const PublicKey& pk, const BenchConfig& config,
                                     std::span<const std::size_t> counts,
                                     std::size_t message_bytes) {
  check_config(config);
  SeededRandom rng(config.seed);
  const RandomTree tree = gen_random_tree(config.levels, config.leaves, rng);
  const auto msg = message_of(message_bytes, rng);

  std::vector<BenchRecord> out;
  for (std::size_t n : counts) {
    if (n == 0) throw Error(ErrorKind::Usage, "encryption counts must be positive");
    std::vector<double> fresh, reuse;
    for (std::size_t rep = 0; rep <= config.reps; ++rep) {
      const double f = seconds([&] {
        for (std::size_t i = 0; i < n; ++i) (void)em_encrypt(pk, build_em(pk, tree.ast, rng), msg, rng);
      });
      const double e = seconds([&] {
        const EncryptionMachine em = build_em(pk, tree.ast, rng);
        for (std::size_t i = 0; i < n; ++i) (void)em_encrypt(pk, em, msg, rng);
      });
      if (rep == 0) continue;
      fresh.push_back(f / static_cast<double>(n));
      reuse.push_back(e / static_cast<double>(n));
    }
    out.push_back({"reuse-sweep", n, "fresh", mean(fresh), stddev(fresh), fresh.size()});
    out.push_back({"reuse-sweep", n, "em", mean(reuse), stddev(reuse), reuse.size()});
  }
  return out;
}

void write_csv(std::ostream& out, std::span<const BenchRecord> records) {
  out << "mode,parameter,scheme,mean_s,std_s,reps\n";
  const auto flags = out.flags();
  out << std::setprecision(9);
  for (const auto& r : records) {
    out << r.mode << ',' << r.parameter << ',' << r.scheme << ',' << r.mean_s << ',' << r.std_s
        << ',' << r.reps << '\n';
  }
  out.flags(flags);
}

}  // namespace abem::bench
