#include "abem/policy.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "abem/errors.hpp"

namespace abem::policy {

PolicyAst PolicyAst::leaf(std::string attribute) {
  PolicyAst n;
  n.attribute = std::move(attribute);
  return n;
}

PolicyAst PolicyAst::gate(std::uint32_t k, std::vector<PolicyAst> children) {
  PolicyAst n;
  n.threshold = k;
  n.children = std::move(children);
  return n;
}

PolicyAst PolicyAst::all_of(std::vector<PolicyAst> children) {
  const auto k = static_cast<std::uint32_t>(children.size());
  return gate(k, std::move(children));
}

PolicyAst PolicyAst::any_of(std::vector<PolicyAst> children) {
  return gate(1, std::move(children));
}

// ---------------------------------------------------------------- parser

namespace {

enum class Tok { Ident, Int, LParen, RParen, Comma, And, Or, Of, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    const std::size_t line = line_, col = col_;
    if (pos_ >= src_.size()) return {Tok::End, "", line, col};

    const char c = src_[pos_];
    const auto single = [&](Tok kind) {
      advance();
      return Token{kind, std::string(1, c), line, col};
    };
    if (c == '(') return single(Tok::LParen);
    if (c == ')') return single(Tok::RParen);
    if (c == ',') return single(Tok::Comma);

    const auto uc = static_cast<unsigned char>(c);
    if (std::isdigit(uc)) {
      std::string digits;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits += src_[pos_];
        advance();
      }
      return {Tok::Int, digits, line, col};
    }
    if (std::isalpha(uc) || c == '_') {
      std::string word;
      while (pos_ < src_.size()) {
        const auto w = static_cast<unsigned char>(src_[pos_]);
        if (!(std::isalnum(w) || w == '_' || w == ':' || w == '.' || w == '-')) break;
        word += src_[pos_];
        advance();
      }
      if (word == "and") return {Tok::And, word, line, col};
      if (word == "or") return {Tok::Or, word, line, col};
      if (word == "of") return {Tok::Of, word, line, col};
      return {Tok::Ident, word, line, col};
    }
    throw PolicyError(std::string("unexpected character '") + c + "'", line, col);
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      advance();
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "attribute";
    case Tok::Int: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::And: return "'and'";
    case Tok::Or: return "'or'";
    case Tok::Of: return "'of'";
    case Tok::End: return "end of input";
  }
  return "token";
}

// Bounds recursion on hostile input such as ten thousand '('.
constexpr std::size_t kMaxNesting = 4 * kMaxDepth;

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { look_ = lexer_.next(); }

  PolicyAst parse() {
    if (look_.kind == Tok::End) throw PolicyError("empty policy", look_.line, look_.column);
    PolicyAst ast = expr();
    if (look_.kind != Tok::End) unexpected();
    return ast;
  }

 private:
  [[noreturn]] void unexpected() const {
    throw PolicyError(std::string("unexpected ") + describe(look_.kind), look_.line,
                      look_.column);
  }

  Token take() {
    Token t = look_;
    look_ = lexer_.next();
    return t;
  }

  void expect(Tok kind) {
    if (look_.kind != kind) {
      throw PolicyError(std::string("expected ") + describe(kind) + ", found " +
                            describe(look_.kind),
                        look_.line, look_.column);
    }
    take();
  }

  PolicyAst expr() {
    if (++nesting_ > kMaxNesting) {
      throw PolicyError("policy nested too deeply", look_.line, look_.column);
    }
    std::vector<PolicyAst> terms;
    terms.push_back(and_expr());
    while (look_.kind == Tok::Or) {
      take();
      terms.push_back(and_expr());
    }
    --nesting_;
    return terms.size() == 1 ? std::move(terms.front()) : PolicyAst::any_of(std::move(terms));
  }

  PolicyAst and_expr() {
    std::vector<PolicyAst> terms;
    terms.push_back(primary());
    while (look_.kind == Tok::And) {
      take();
      terms.push_back(primary());
    }
    return terms.size() == 1 ? std::move(terms.front()) : PolicyAst::all_of(std::move(terms));
  }

  PolicyAst primary() {
    switch (look_.kind) {
      case Tok::Ident:
        return PolicyAst::leaf(take().text);
      case Tok::LParen: {
        take();
        PolicyAst inner = expr();
        expect(Tok::RParen);
        return inner;
      }
      case Tok::Int:
        return threshold_gate();
      default:
        unexpected();
    }
  }

  PolicyAst threshold_gate() {
    const Token num = take();
    expect(Tok::Of);
    expect(Tok::LParen);
    std::vector<PolicyAst> children;
    children.push_back(expr());
    while (look_.kind == Tok::Comma) {
      take();
      children.push_back(expr());
    }
    expect(Tok::RParen);

    const std::string digits = num.text.substr(
        std::min(num.text.find_first_not_of('0'), num.text.size() - 1));
    if (digits.size() > 9 || std::stoul(digits) == 0 ||
        std::stoul(digits) > children.size()) {
      throw PolicyError("threshold " + num.text + " out of range for " +
                            std::to_string(children.size()) + " children",
                        num.line, num.column);
    }
    return PolicyAst::gate(static_cast<std::uint32_t>(std::stoul(digits)),
                           std::move(children));
  }

  Lexer lexer_;
  Token look_;
  std::size_t nesting_ = 0;
};

}  // namespace

PolicyAst parse_policy(std::string_view text) {
  PolicyAst ast = Parser(text).parse();
  if (depth(ast) > kMaxDepth) {
    throw PolicyError("policy deeper than " + std::to_string(kMaxDepth) + " levels", 1, 1);
  }
  if (leaf_count(ast) > kMaxLeaves) {
    throw PolicyError("policy has more than " + std::to_string(kMaxLeaves) + " leaves", 1, 1);
  }
  return ast;
}

namespace {

void print(const PolicyAst& n, bool top, std::string& out) {
  if (n.is_leaf()) {
    out += n.attribute;
    return;
  }
  const std::size_t count = n.children.size();
  const char* sep = nullptr;
  if (count >= 2 && n.threshold == count) sep = " and ";
  if (count >= 2 && n.threshold == 1) sep = " or ";

  if (sep == nullptr) {
    out += std::to_string(n.threshold) + " of (";
    for (std::size_t i = 0; i < count; ++i) {
      if (i != 0) out += ", ";
      print(n.children[i], true, out);
    }
    out += ')';
    return;
  }
  if (!top) out += '(';
  for (std::size_t i = 0; i < count; ++i) {
    if (i != 0) out += sep;
    print(n.children[i], false, out);
  }
  if (!top) out += ')';
}

}  // namespace

std::string to_string(const PolicyAst& ast) {
  std::string out;
  print(ast, true, out);
  return out;
}

// ------------------------------------------------------------ structure

namespace {

void validate_node(const PolicyAst& n, std::size_t level) {
  if (level > kMaxDepth) {
    throw Error(ErrorKind::Usage, "policy deeper than " + std::to_string(kMaxDepth) + " levels");
  }
  if (n.is_leaf()) {
    if (!n.children.empty()) throw Error(ErrorKind::Usage, "leaf with children");
    if (normalize_attribute(n.attribute) != n.attribute) {
      throw Error(ErrorKind::Usage, "attribute '" + n.attribute + "' is not normalized");
    }
    return;
  }
  if (!n.attribute.empty()) throw Error(ErrorKind::Usage, "gate with an attribute");
  if (n.children.empty() || n.threshold > n.children.size()) {
    throw Error(ErrorKind::Usage, "threshold " + std::to_string(n.threshold) +
                                      " out of range for " +
                                      std::to_string(n.children.size()) + " children");
  }
  for (const auto& c : n.children) validate_node(c, level + 1);
}

}  // namespace

void validate(const PolicyAst& ast) {
  validate_node(ast, 1);
  if (leaf_count(ast) > kMaxLeaves) {
    throw Error(ErrorKind::Usage, "policy has more than " + std::to_string(kMaxLeaves) + " leaves");
  }
}

std::size_t leaf_count(const PolicyAst& ast) {
  if (ast.is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : ast.children) n += leaf_count(c);
  return n;
}

std::size_t depth(const PolicyAst& ast) {
  std::size_t d = 0;
  for (const auto& c : ast.children) d = std::max(d, depth(c));
  return d + 1;
}

namespace {

void collect_leaves(const PolicyAst& n, std::vector<std::string>& out) {
  if (n.is_leaf()) {
    out.push_back(n.attribute);
    return;
  }
  for (const auto& c : n.children) collect_leaves(c, out);
}

}  // namespace

std::vector<std::string> leaf_attributes(const PolicyAst& ast) {
  std::vector<std::string> out;
  collect_leaves(ast, out);
  return out;
}

AttributeSet make_attribute_set(std::span<const std::string> attrs) {
  AttributeSet out;
  for (const auto& a : attrs) out.insert(normalize_attribute(a));
  return out;
}

// -------------------------------------------------------------- sharing

namespace {

using CoefficientFn = std::function<Scalar(bool leading)>;

void share_node(const PolicyAst& n, const Scalar& value, const CoefficientFn& coef,
                SharedTree& out) {
  out.node_values.push_back(value);
  if (n.is_leaf()) {
    out.leaf_shares.push_back(value);
    return;
  }
  // q(x) = value + c_1 x + ... + c_{k-1} x^{k-1}
  std::vector<Scalar> poly{value};
  for (std::uint32_t d = 1; d < n.threshold; ++d) poly.push_back(coef(d + 1 == n.threshold));

  for (std::size_t i = 0; i < n.children.size(); ++i) {
    const Scalar x = Scalar::from_u64(i + 1);
    Scalar y;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) y = y * x + *it;
    share_node(n.children[i], y, coef, out);
  }
}

SharedTree share_with(const PolicyAst& ast, const Scalar& secret, const CoefficientFn& coef) {
  SharedTree out{ast, secret, {}, {}};
  share_node(ast, secret, coef, out);
  return out;
}

}  // namespace

SharedTree share_secret(const PolicyAst& ast, const Scalar& secret, RandomSource& rng) {
  // Nonzero leading coefficient keeps the degree exactly k-1.
  return share_with(ast, secret, [&](bool leading) {
    return leading ? Scalar::random_nonzero(rng) : Scalar::random(rng);
  });
}

SharedTree share_secret(const PolicyAst& ast, const Scalar& secret,
                        const std::function<Scalar()>& next_coefficient) {
  return share_with(ast, secret, [&](bool) { return next_coefficient(); });
}

Scalar lagrange_at_zero(std::uint32_t i, std::span<const std::uint32_t> set) {
  std::vector<std::uint32_t> sorted(set.begin(), set.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("duplicate interpolation index");
  }
  if (!sorted.empty() && sorted.front() == 0) {
    throw std::invalid_argument("interpolation index 0");
  }
  if (!std::binary_search(sorted.begin(), sorted.end(), i)) {
    throw std::invalid_argument("index " + std::to_string(i) + " not in set");
  }

  const Scalar xi = Scalar::from_u64(i);
  Scalar num = Scalar::from_u64(1);
  Scalar den = Scalar::from_u64(1);
  for (const std::uint32_t j : sorted) {
    if (j == i) continue;
    const Scalar xj = Scalar::from_u64(j);
    num *= -xj;
    den *= xi - xj;
  }
  return num * den.inverse();
}

// ----------------------------------------------------------- assignment

namespace {

// Returns the assignment for `n` if satisfiable. `next_leaf` is advanced
// past every leaf under `n` either way.
std::optional<AssignmentNode> satisfy(const PolicyAst& n, std::uint32_t index,
                                      const AttributeSet& attrs, std::size_t& next_leaf) {
  if (n.is_leaf()) {
    const std::size_t ordinal = next_leaf++;
    if (!attrs.contains(n.attribute)) return std::nullopt;
    AssignmentNode a;
    a.index = index;
    a.leaf = ordinal;
    return a;
  }
  AssignmentNode a;
  a.index = index;
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    auto child = satisfy(n.children[i], static_cast<std::uint32_t>(i + 1), attrs, next_leaf);
    if (child && a.chosen.size() < n.threshold) a.chosen.push_back(std::move(*child));
  }
  if (a.chosen.size() < n.threshold) return std::nullopt;
  return a;
}

void collect_used(const AssignmentNode& a, const std::vector<std::string>& attrs,
                  std::map<std::size_t, std::string>& out) {
  if (a.leaf) {
    out.emplace(*a.leaf, attrs.at(*a.leaf));
    return;
  }
  for (const auto& c : a.chosen) collect_used(c, attrs, out);
}

}  // namespace

std::optional<SatisfyingAssignment> find_satisfying(const PolicyAst& ast,
                                                    const AttributeSet& attrs) {
  std::size_t next_leaf = 0;
  auto root = satisfy(ast, 1, attrs, next_leaf);
  if (!root) return std::nullopt;
  SatisfyingAssignment out;
  out.root = std::move(*root);
  collect_used(out.root, leaf_attributes(ast), out.leaves);
  return out;
}

namespace {

std::vector<std::uint32_t> chosen_indices(const AssignmentNode& a) {
  std::vector<std::uint32_t> s;
  s.reserve(a.chosen.size());
  for (const auto& c : a.chosen) s.push_back(c.index);
  return s;
}

Scalar interpolate(const AssignmentNode& a, const std::map<std::size_t, Scalar>& shares) {
  if (a.leaf) {
    const auto it = shares.find(*a.leaf);
    if (it == shares.end()) {
      throw std::invalid_argument("missing share for leaf " + std::to_string(*a.leaf));
    }
    return it->second;
  }
  const auto set = chosen_indices(a);
  Scalar acc;
  for (const auto& c : a.chosen) acc += interpolate(c, shares) * lagrange_at_zero(c.index, set);
  return acc;
}

void push_coefficients(const AssignmentNode& a, const Scalar& factor,
                       std::vector<std::pair<std::size_t, Scalar>>& out) {
  if (a.leaf) {
    out.emplace_back(*a.leaf, factor);
    return;
  }
  const auto set = chosen_indices(a);
  for (const auto& c : a.chosen) {
    push_coefficients(c, factor * lagrange_at_zero(c.index, set), out);
  }
}

}  // namespace

Scalar reconstruct(const std::map<std::size_t, Scalar>& shares,
                   const SatisfyingAssignment& assignment) {
  return interpolate(assignment.root, shares);
}

std::vector<std::pair<std::size_t, Scalar>> leaf_coefficients(
    const SatisfyingAssignment& assignment) {
  std::vector<std::pair<std::size_t, Scalar>> out;
  push_coefficients(assignment.root, Scalar::from_u64(1), out);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace abem::policy
