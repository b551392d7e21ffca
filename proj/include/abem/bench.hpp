#pragma once

// Encryption timing harness: fresh encryption (build_em + em_encrypt per
// message) against reuse of one cached EncryptionMachine.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "abem/policy.hpp"
#include "abem/random.hpp"
#include "abem/scheme.hpp"

namespace abem::bench {

/// Uniform in [0, bound). bound > 0.
std::uint64_t uniform(RandomSource& rng, std::uint64_t bound);

struct RandomTree {
  std::string text;
  policy::PolicyAst ast;
  policy::AttributeSet satisfying;
};

/// A spine of `levels` nodes with the remaining leaves spread over the
/// spine gates at random. Every gate has at least two children, so
/// levels >= 2 needs leaves >= levels. Attributes are attr0..attrN-1 in
/// preorder, thresholds uniform in [1, children]. Throws Error(Usage) for
/// infeasible shapes.
RandomTree gen_random_tree(std::size_t levels, std::size_t leaves, RandomSource& rng);

struct BenchRecord {
  std::string mode;  // "size-sweep" | "reuse-sweep"
  std::uint64_t parameter = 0;  // message bytes or encryption count
  std::string scheme;  // "fresh" | "em"
  double mean_s = 0;
  double std_s = 0;
  std::size_t reps = 0;
};

struct BenchConfig {
  std::size_t levels = 10;
  std::size_t leaves = 100;
  std::size_t reps = 5;
  std::uint64_t seed = 1;
};

/// Per message size, per-encryption seconds. "em" encrypts with one
/// machine built before timing starts.
std::vector<BenchRecord> size_sweep(const PublicKey& pk, const BenchConfig& config,
                                    std::span<const std::size_t> sizes);

/// Per count N, cumulative average over N encryptions of one message.
/// "em" includes its single build_em in the average.
std::vector<BenchRecord> reuse_sweep(const PublicKey& pk, const BenchConfig& config,
                                     std::span<const std::size_t> counts,
                                     std::size_t message_bytes = 1024);

void write_csv(std::ostream& out, std::span<const BenchRecord> records);

}  // namespace abem::bench
