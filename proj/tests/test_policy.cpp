#include "abem/policy.hpp"

#include <functional>

#include "abem/bench.hpp"
#include "abem/errors.hpp"
#include "support.hpp"

using namespace abem;
using namespace abem::policy;

namespace {

PolicyAst L(const char* a) { return PolicyAst::leaf(a); }

// Direct threshold evaluation, independent of find_satisfying.
bool evaluate(const PolicyAst& n, const AttributeSet& attrs) {
  if (n.is_leaf()) return attrs.count(n.attribute) != 0;
  std::uint32_t ok = 0;
  for (const auto& c : n.children) ok += evaluate(c, attrs) ? 1 : 0;
  return ok >= n.threshold;
}

Scalar S(std::uint64_t v) { return Scalar::from_u64(v); }

}  // namespace

TEST_CASE("parser precedence and flattening") {
  CHECK(parse_policy("A") == L("A"));
  CHECK(parse_policy("A and B and C") == PolicyAst::all_of({L("A"), L("B"), L("C")}));
  CHECK(parse_policy("A or B and C") ==
        PolicyAst::any_of({L("A"), PolicyAst::all_of({L("B"), L("C")})}));
  CHECK(parse_policy("(A and B) or C") ==
        PolicyAst::any_of({PolicyAst::all_of({L("A"), L("B")}), L("C")}));
  CHECK(parse_policy("(A and B) and C") ==
        PolicyAst::all_of({PolicyAst::all_of({L("A"), L("B")}), L("C")}));
  CHECK(parse_policy("2 of (A, B, C)") == PolicyAst::gate(2, {L("A"), L("B"), L("C")}));
  CHECK(parse_policy("1 of (A)") == PolicyAst::gate(1, {L("A")}));
  CHECK(parse_policy("AND or Or") == PolicyAst::any_of({L("AND"), L("Or")}));
  CHECK(parse_policy("  2 of (A or B, C, x:y.z-1)\n") ==
        PolicyAst::gate(2, {PolicyAst::any_of({L("A"), L("B")}), L("C"), L("x:y.z-1")}));
}

TEST_CASE("parser errors carry positions") {
  auto column_of = [](const char* text) -> std::pair<std::size_t, std::size_t> {
    try {
      (void)parse_policy(text);
    } catch (const PolicyError& e) {
      return {e.line(), e.column()};
    }
    FAIL("no error for " << text);
    return {0, 0};
  };
  CHECK(column_of("A and") == std::pair<std::size_t, std::size_t>{1, 6});
  CHECK(column_of("A\nand or B").first == 2);
  for (const char* bad : {"", "()", "A B", "A and and B", "4 of (A, B, C)", "0 of (A)",
                          "2 of A, B", "2 of ()", "(A", "A)", "and", "A or of", "1abc", "A & B",
                          "2 of (A, B,)"}) {
    CAPTURE(std::string(bad));
    CHECK_THROWS_AS((void)parse_policy(bad), PolicyError);
  }
}

TEST_CASE("parser limits") {
  std::string deep = "A";
  for (int i = 0; i < 40; ++i) deep = "1 of (" + deep + ")";
  CHECK_THROWS_AS((void)parse_policy(deep), Error);

  std::string wide = "attr0";
  for (int i = 1; i < 4097; ++i) wide += " or attr" + std::to_string(i);
  CHECK_THROWS_AS((void)parse_policy(wide), Error);

  std::string nested(200, '(');
  nested += "A" + std::string(200, ')');
  CHECK_THROWS_AS((void)parse_policy(nested), PolicyError);
}

TEST_CASE("printing round-trips") {
  for (const char* text : {"A", "A and B", "A or B", "(A and B) or C", "2 of (A, B, C)",
                           "1 of (A)", "2 of (A, 2 of (B, C, D), E or F)", "A and 2 of (B, C, D) and (E or F)", "(A or B) and (C or D)",
                           "(A and B) and C", "(A or B) or C"}) {
    const auto ast = parse_policy(text);
    CHECK(to_string(ast) == text);
    CHECK(parse_policy(to_string(ast)) == ast);
  }
  SeededRandom rng(21);
  for (int i = 0; i < 100; ++i) {
    const std::size_t levels = 1 + bench::uniform(rng, 5);
    const std::size_t leaves = levels == 1 ? 1 : levels + bench::uniform(rng, 12);
    const auto tree = bench::gen_random_tree(levels, leaves, rng);
    CHECK(parse_policy(tree.text) == tree.ast);
  }
}

TEST_CASE("shape helpers") {
  const auto ast = parse_policy("2 of (A, B and C, D or (E and F))");
  CHECK(leaf_count(ast) == 6);
  CHECK(depth(ast) == 4);
  CHECK(depth(L("A")) == 1);
  CHECK(leaf_attributes(ast) == std::vector<std::string>{"A", "B", "C", "D", "E", "F"});
  const std::vector<std::string> raw{" B", "A", "B"};
  CHECK(make_attribute_set(raw) == AttributeSet{"A", "B"});
}

TEST_CASE("sharing with a forced polynomial") {
  // q(x) = 7 + 4x under a 2-of-3 gate: children receive 11, 15, 19.
  const auto ast = parse_policy("2 of (A, B, C)");
  const auto shared = share_secret(ast, S(7), [] { return S(4); });
  REQUIRE(shared.leaf_shares.size() == 3);
  CHECK(shared.leaf_shares[0] == S(11));
  CHECK(shared.leaf_shares[1] == S(15));
  CHECK(shared.leaf_shares[2] == S(19));
  CHECK(shared.node_values[0] == S(7));

  // q(x) = 5 + 2x + 3x^2 under 3-of-3: 10, 21, 38.
  std::vector<Scalar> coeffs{S(2), S(3)};
  std::size_t next = 0;
  const auto s3 = share_secret(parse_policy("A and B and C"), S(5), [&] { return coeffs[next++]; });
  CHECK(s3.leaf_shares == std::vector<Scalar>{S(10), S(21), S(38)});
}

TEST_CASE("lagrange coefficients at zero") {
  const std::uint32_t s12[] = {1, 2};
  CHECK(lagrange_at_zero(1, s12) == S(2));
  CHECK(lagrange_at_zero(2, s12) == -S(1));
  const std::uint32_t s123[] = {1, 2, 3};
  CHECK(lagrange_at_zero(1, s123) == S(3));
  CHECK(lagrange_at_zero(2, s123) == -S(3));
  CHECK(lagrange_at_zero(3, s123) == S(1));
  const std::uint32_t s13[] = {1, 3};
  // (0-3)/(1-3) = 3/2, (0-1)/(3-1) = -1/2
  CHECK(lagrange_at_zero(1, s13) == S(3) * S(2).inverse());
  CHECK(lagrange_at_zero(3, s13) == -S(2).inverse());

  const std::uint32_t dup[] = {1, 1};
  const std::uint32_t zero[] = {0, 1};
  CHECK_THROWS_AS((void)lagrange_at_zero(4, s12), std::invalid_argument);
  CHECK_THROWS_AS((void)lagrange_at_zero(1, dup), std::invalid_argument);
  CHECK_THROWS_AS((void)lagrange_at_zero(1, zero), std::invalid_argument);
}

TEST_CASE("reconstruction from forced shares") {
  const auto ast = parse_policy("2 of (A, B, C)");
  const auto shared = share_secret(ast, S(7), [] { return S(4); });
  for (const AttributeSet& attrs :
       {AttributeSet{"A", "B"}, AttributeSet{"B", "C"}, AttributeSet{"A", "C"}, AttributeSet{"A", "B", "C"}}) {
    const auto a = find_satisfying(ast, attrs);
    REQUIRE(a.has_value());
    std::map<std::size_t, Scalar> shares;
    for (const auto& [ordinal, attr] : a->leaves) shares.emplace(ordinal, shared.leaf_shares[ordinal]);
    CHECK(reconstruct(shares, *a) == S(7));
  }
  CHECK_FALSE(find_satisfying(ast, {"A"}).has_value());
}

TEST_CASE("find_satisfying picks the lowest satisfiable children") {
  const auto ast = parse_policy("2 of (A, B, C)");
  const auto a = find_satisfying(ast, {"A", "B", "C"});
  REQUIRE(a.has_value());
  CHECK(a->leaves == std::map<std::size_t, std::string>{{0, "A"}, {1, "B"}});
  const auto b = find_satisfying(ast, {"B", "C"});
  REQUIRE(b.has_value());
  REQUIRE(b->root.chosen.size() == 2);
  CHECK(b->root.chosen[0].index == 2);
  CHECK(b->root.chosen[1].index == 3);
}

TEST_CASE("random sharings reconstruct and satisfy the evaluator") {
  SeededRandom rng(22);
  for (int i = 0; i < 200; ++i) {
    const std::size_t levels = 1 + bench::uniform(rng, 4);
    const std::size_t leaves = levels == 1 ? 1 : levels + bench::uniform(rng, 17 - levels);
    const auto tree = bench::gen_random_tree(levels, leaves, rng);
    const Scalar secret = Scalar::random(rng);
    const auto shared = share_secret(tree.ast, secret, rng);

    CHECK(evaluate(tree.ast, tree.satisfying));
    const auto a = find_satisfying(tree.ast, tree.satisfying);
    REQUIRE(a.has_value());
    std::map<std::size_t, Scalar> shares;
    for (const auto& [ordinal, attr] : a->leaves) {
      CHECK(tree.satisfying.count(attr) == 1);
      shares.emplace(ordinal, shared.leaf_shares[ordinal]);
    }
    CHECK(reconstruct(shares, *a) == secret);

    Scalar sum;
    for (const auto& [ordinal, coefficient] : leaf_coefficients(*a)) {
      sum += coefficient * shared.leaf_shares[ordinal];
    }
    CHECK(sum == secret);
  }
}

TEST_CASE("shifting leaf shares shifts every reconstructed value") {
  SeededRandom rng(23);
  for (int i = 0; i < 50; ++i) {
    const auto tree = bench::gen_random_tree(3, 8, rng);
    const Scalar secret = Scalar::random(rng);
    const Scalar delta = Scalar::random(rng);
    const auto shared = share_secret(tree.ast, secret, rng);
    const auto a = find_satisfying(tree.ast, tree.satisfying);
    REQUIRE(a.has_value());
    std::map<std::size_t, Scalar> shifted;
    for (const auto& [ordinal, attr] : a->leaves) {
      shifted.emplace(ordinal, shared.leaf_shares[ordinal] + delta);
    }
    CHECK(reconstruct(shifted, *a) == secret + delta);
  }
}

TEST_CASE("find_satisfying against exhaustive enumeration") {
  SeededRandom rng(24);
  for (int i = 0; i < 30; ++i) {
    const std::size_t leaves = 2 + bench::uniform(rng, 7);
    const auto tree = bench::gen_random_tree(std::min<std::size_t>(3, leaves), leaves, rng);
    const auto names = leaf_attributes(tree.ast);
    for (std::uint32_t mask = 0; mask < (1u << names.size()); ++mask) {
      AttributeSet attrs;
      for (std::size_t b = 0; b < names.size(); ++b) {
        if ((mask >> b) & 1u) attrs.insert(names[b]);
      }
      CHECK(find_satisfying(tree.ast, attrs).has_value() == evaluate(tree.ast, attrs));
    }
  }
}

TEST_CASE("validate rejects malformed trees") {
  CHECK_THROWS_AS(validate(PolicyAst::gate(3, {L("A"), L("B")})), Error);
  CHECK_THROWS_AS(validate(PolicyAst::gate(1, {})), Error);
  CHECK_THROWS_AS(validate(L("bad attr")), Error);
  CHECK_NOTHROW(validate(parse_policy("2 of (A, B, C)")));
}
