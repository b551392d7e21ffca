#include "abem/bench.hpp"

#include <sstream>

#include "abem/errors.hpp"
#include "support.hpp"

using namespace abem;

namespace {

bool holds(const policy::PolicyAst& n, const policy::AttributeSet& attrs) {
  if (n.is_leaf()) return attrs.count(n.attribute) > 0;
  std::uint32_t got = 0;
  for (const auto& c : n.children) got += holds(c, attrs) ? 1 : 0;
  return got >= n.threshold;
}

std::size_t min_children(const policy::PolicyAst& n) {
  if (n.is_leaf()) return SIZE_MAX;
  std::size_t m = n.children.size();
  for (const auto& c : n.children) m = std::min(m, min_children(c));
  return m;
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("uniform stays in range and covers it") {
  SeededRandom rng(81);
  std::array<int, 6> hits{};
  for (int i = 0; i < 6000; ++i) {
    const auto v = bench::uniform(rng, 6);
    REQUIRE(v < 6);
    ++hits[v];
  }
  for (int h : hits) CHECK((h > 850 && h < 1150));
  CHECK(bench::uniform(rng, 1) == 0);
}

TEST_CASE("smallest tree is a single attribute") {
  SeededRandom rng(82);
  const auto t = bench::gen_random_tree(1, 1, rng);
  CHECK(t.text == "attr0");
  CHECK(t.satisfying == policy::AttributeSet{"attr0"});
}

TEST_CASE("random trees have the requested shape") {
  SeededRandom rng(42);
  const auto t = bench::gen_random_tree(10, 100, rng);
  const auto parsed = policy::parse_policy(t.text);
  CHECK(parsed == t.ast);
  CHECK(policy::depth(parsed) == 10);
  CHECK(policy::leaf_count(parsed) == 100);
  CHECK(min_children(parsed) >= 2);
  const auto attrs = policy::leaf_attributes(parsed);
  for (std::size_t i = 0; i < attrs.size(); ++i) CHECK(attrs[i] == "attr" + std::to_string(i));
  CHECK(holds(parsed, t.satisfying));

  for (std::size_t levels = 1; levels <= 6; ++levels) {
    for (std::size_t leaves = std::max<std::size_t>(levels, 2); leaves <= 20; leaves += 3) {
      if (levels == 1) break;
      const auto r = bench::gen_random_tree(levels, leaves, rng);
      CAPTURE(r.text);
      CHECK(policy::depth(r.ast) == levels);
      CHECK(policy::leaf_count(r.ast) == leaves);
      CHECK(holds(r.ast, r.satisfying));
      CHECK(policy::find_satisfying(r.ast, r.satisfying).has_value());
    }
  }
}

TEST_CASE("generation is deterministic per seed") {
  SeededRandom a(7), b(7), c(8);
  const auto ta = bench::gen_random_tree(5, 30, a);
  const auto tb = bench::gen_random_tree(5, 30, b);
  const auto tc = bench::gen_random_tree(5, 30, c);
  CHECK(ta.text == tb.text);
  CHECK(ta.satisfying == tb.satisfying);
  CHECK(ta.text != tc.text);
}

TEST_CASE("infeasible shapes are usage errors") {
  SeededRandom rng(83);
  for (auto [levels, leaves] : std::vector<std::pair<std::size_t, std::size_t>>{
           {0, 1}, {1, 0}, {1, 2}, {5, 4}, {3, 2}}) {
    CAPTURE(levels);
    CAPTURE(leaves);
    try {
      bench::gen_random_tree(levels, leaves, rng);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Usage);
    }
  }
}

TEST_CASE("sweeps write the csv schema") {
  SeededRandom rng(84);
  const auto kp = setup(rng);
  bench::BenchConfig cfg;
  cfg.levels = 2;
  cfg.leaves = 3;
  cfg.reps = 5;
  const std::vector<std::size_t> sizes{16, 4096};
  const std::vector<std::size_t> counts{1, 3};
  auto records = bench::size_sweep(kp.pk, cfg, sizes);
  const auto reuse = bench::reuse_sweep(kp.pk, cfg, counts, 64);
  records.insert(records.end(), reuse.begin(), reuse.end());
  REQUIRE(records.size() == 8);
  for (const auto& r : records) {
    CHECK(r.reps == 5);
    CHECK(r.mean_s > 0);
    CHECK(r.std_s >= 0);
    CHECK((r.scheme == "fresh" || r.scheme == "em"));
  }
  std::ostringstream out;
  bench::write_csv(out, records);
  const auto lines = split_lines(out.str());
  REQUIRE(lines.size() == 9);
  CHECK(lines[0] == "mode,parameter,scheme,mean_s,std_s,reps");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 5);
    CHECK((lines[i].rfind("size-sweep,", 0) == 0 || lines[i].rfind("reuse-sweep,", 0) == 0));
  }

  cfg.reps = 4;
  CHECK_THROWS_AS(bench::size_sweep(kp.pk, cfg, sizes), Error);
}
