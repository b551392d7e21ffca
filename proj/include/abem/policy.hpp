#pragma once

// Access policies: text grammar, threshold access trees, top-down secret
// sharing and bottom-up Lagrange reconstruction.
//
// Grammar (keywords are lowercase and reserved):
//
//   expr      := and_expr ("or" and_expr)*
//   and_expr  := primary ("and" primary)*
//   primary   := ATTRIBUTE | "(" expr ")" | INT "of" "(" expr ("," expr)* ")"
//   ATTRIBUTE := [A-Za-z_][A-Za-z0-9_:.-]*
//
// A chain "a and b and c" becomes one 3-of-3 gate; parentheses keep nesting.
//
// Child indices are 1-based positions in the children list. Leaves are
// numbered 0..n-1 in preorder; ciphertext leaf arrays use that order.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abem/bilinear.hpp"

namespace abem::policy {

inline constexpr std::size_t kMaxDepth = 32;
inline constexpr std::size_t kMaxLeaves = 4096;

using AttributeSet = std::set<std::string>;

/// Leaf when `threshold == 0`, otherwise a k-of-n gate over `children`.
struct PolicyAst {
  std::string attribute;
  std::uint32_t threshold = 0;
  std::vector<PolicyAst> children;

  static PolicyAst leaf(std::string attribute);
  static PolicyAst gate(std::uint32_t k, std::vector<PolicyAst> children);
  static PolicyAst all_of(std::vector<PolicyAst> children);  // AND
  static PolicyAst any_of(std::vector<PolicyAst> children);  // OR

  bool is_leaf() const { return threshold == 0; }

  friend bool operator==(const PolicyAst&, const PolicyAst&) = default;
};

PolicyAst parse_policy(std::string_view text);

/// Canonical text form; parse_policy(to_string(ast)) == ast.
std::string to_string(const PolicyAst& ast);

/// Throws Error(Usage) unless every gate has 1 <= k <= n children, every
/// leaf attribute is well formed, and the depth/leaf limits hold.
void validate(const PolicyAst& ast);

std::size_t leaf_count(const PolicyAst& ast);
/// A lone leaf has depth 1.
std::size_t depth(const PolicyAst& ast);
/// Leaf attributes in preorder.
std::vector<std::string> leaf_attributes(const PolicyAst& ast);

/// Normalizes and deduplicates.
AttributeSet make_attribute_set(std::span<const std::string> attrs);

/// Result of top-down sharing: q_x(0) for every node in preorder (the
/// root's entry is the secret) and the leaf shares in leaf order.
struct SharedTree {
  PolicyAst ast;
  Scalar secret;
  std::vector<Scalar> node_values;
  std::vector<Scalar> leaf_shares;
};

/// Samples, for each gate with threshold k, a polynomial of degree exactly
/// k-1 whose constant term is the value handed down by the parent.
SharedTree share_secret(const PolicyAst& ast, const Scalar& secret, RandomSource& rng);

/// Same, drawing polynomial coefficients (lowest degree first, per gate in
/// preorder) from `next_coefficient`. Lets tests force known polynomials.
SharedTree share_secret(const PolicyAst& ast, const Scalar& secret,
                        const std::function<Scalar()>& next_coefficient);

/// Delta_{i,S}(0) = prod_{j in S, j != i} (0 - j) / (i - j).
/// Throws std::invalid_argument if i is not in S, S has duplicates or zero.
Scalar lagrange_at_zero(std::uint32_t i, std::span<const std::uint32_t> set);

/// One node of a satisfying assignment. Gates list exactly k chosen
/// children in increasing index order.
struct AssignmentNode {
  std::uint32_t index = 1;  // position under the parent; 1 for the root
  std::optional<std::size_t> leaf;  // leaf ordinal when this is a leaf
  std::vector<AssignmentNode> chosen;
};

struct SatisfyingAssignment {
  AssignmentNode root;
  /// Used leaves: ordinal -> attribute, ascending by ordinal.
  std::map<std::size_t, std::string> leaves;
};

/// nullopt iff `attrs` does not satisfy the tree. At each gate the k
/// satisfiable children with the lowest indices are taken.
std::optional<SatisfyingAssignment> find_satisfying(const PolicyAst& ast,
                                                    const AttributeSet& attrs);

/// Bottom-up interpolation of the root value from leaf shares keyed by
/// leaf ordinal. Throws std::invalid_argument if a used leaf has no share.
Scalar reconstruct(const std::map<std::size_t, Scalar>& shares,
                   const SatisfyingAssignment& assignment);

/// Per used leaf, the product of Lagrange coefficients on its path to the
/// root, so that root = sum(coefficient * share). Ascending by ordinal.
std::vector<std::pair<std::size_t, Scalar>> leaf_coefficients(
    const SatisfyingAssignment& assignment);

}  // namespace abem::policy
