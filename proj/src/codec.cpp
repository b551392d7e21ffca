#include "abem/codec.hpp"

#include <algorithm>
#include <cctype>

#include <openssl/evp.h>

#include "abem/errors.hpp"

namespace abem::codec {

using policy::PolicyAst;

std::string_view kind_name(ObjectTag tag) {
  switch (tag) {
    case ObjectTag::PublicKey: return "PUBLIC KEY";
    case ObjectTag::MasterKey: return "MASTER KEY";
    case ObjectTag::SecretKey: return "SECRET KEY";
    case ObjectTag::EncryptionMachine: return "ENCRYPTION MACHINE";
    case ObjectTag::Ciphertext: return "CIPHERTEXT";
    case ObjectTag::TransformKey: return "TRANSFORM KEY";
    case ObjectTag::RetrievalKey: return "RETRIEVAL KEY";
    case ObjectTag::PartialDecryption: return "PARTIAL DECRYPTION";
  }
  return "UNKNOWN";
}

namespace {

// Upper bound on per-key attribute components; far above any real key.
constexpr std::uint32_t kMaxComponents = 1u << 16;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b) {
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

std::uint32_t checked_length(std::size_t n) {
  if (n > 0xFFFFFFFFu) throw Error(ErrorKind::Usage, "field larger than 2^32 - 1 bytes");
  return static_cast<std::uint32_t>(n);
}

class Writer {
 public:
  Writer(ObjectTag tag, CurveId curve) {
    out_.assign(kMagic.begin(), kMagic.end());
    out_.push_back(kVersion);
    out_.push_back(static_cast<std::uint8_t>(tag));
    out_.push_back(static_cast<std::uint8_t>(curve));
  }

  Writer& field(std::uint8_t tag, std::span<const std::uint8_t> value) {
    out_.push_back(tag);
    put_u32(out_, checked_length(value.size()));
    out_.insert(out_.end(), value.begin(), value.end());
    return *this;
  }
  Writer& field(std::uint8_t tag, std::string_view s) {
    return field(tag, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }
  Writer& count(std::uint8_t tag, std::size_t n) {
    std::vector<std::uint8_t> v;
    put_u32(v, checked_length(n));
    return field(tag, v);
  }
  template <typename E>
  Writer& element(std::uint8_t tag, const E& e) {
    const auto b = e.encode();
    return field(tag, b);
  }
  Writer& mirrored(std::uint8_t tag, const MirroredElement& m) {
    std::vector<std::uint8_t> v;
    const auto l = m.left.encode();
    const auto r = m.right.encode();
    v.insert(v.end(), l.begin(), l.end());
    v.insert(v.end(), r.begin(), r.end());
    return field(tag, v);
  }

  std::vector<std::uint8_t> finish() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

struct Envelope {
  ObjectTag tag;
  CurveId curve;
};

Envelope read_envelope(std::span<const std::uint8_t> bytes) {
  const std::size_t n = std::min(bytes.size(), kMagic.size());
  if (!std::equal(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n),
                  kMagic.begin())) {
    throw DecodeError(DecodeFailure::BadMagic, "not an ABEM object");
  }
  if (bytes.size() < kEnvelopeSize) throw DecodeError(DecodeFailure::Truncated, "envelope");
  if (bytes[4] != kVersion) {
    throw DecodeError(DecodeFailure::UnsupportedVersion,
                      "version " + std::to_string(bytes[4]));
  }
  if (bytes[5] < 0x01 || bytes[5] > 0x08) {
    throw DecodeError(DecodeFailure::TagMismatch, "unknown object tag " + std::to_string(bytes[5]));
  }
  if (bytes[6] != static_cast<std::uint8_t>(CurveId::Bls12_381)) {
    throw DecodeError(DecodeFailure::CurveMismatch, "unknown curve id " + std::to_string(bytes[6]));
  }
  return {static_cast<ObjectTag>(bytes[5]), static_cast<CurveId>(bytes[6])};
}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, ObjectTag expected,
         std::optional<CurveId> expected_curve)
      : bytes_(bytes) {
    const Envelope env = read_envelope(bytes);
    if (env.tag != expected) {
      throw DecodeError(DecodeFailure::TagMismatch,
                        "expected " + std::string(kind_name(expected)) + ", found " +
                            std::string(kind_name(env.tag)));
    }
    if (expected_curve && *expected_curve != env.curve) {
      throw DecodeError(DecodeFailure::CurveMismatch, "object made for another curve");
    }
    curve_ = env.curve;
    pos_ = kEnvelopeSize;
  }

  CurveId curve() const { return curve_; }

  std::span<const std::uint8_t> field(std::uint8_t tag) {
    if (bytes_.size() - pos_ < 5) throw DecodeError(DecodeFailure::Truncated, "field header");
    if (bytes_[pos_] != tag) {
      throw DecodeError(DecodeFailure::Malformed, "expected field " + std::to_string(tag) +
                                                      ", found " + std::to_string(bytes_[pos_]));
    }
    const std::uint32_t len = get_u32(bytes_.subspan(pos_ + 1, 4));
    pos_ += 5;
    if (bytes_.size() - pos_ < len) throw DecodeError(DecodeFailure::Truncated, "field body");
    auto v = bytes_.subspan(pos_, len);
    pos_ += len;
    return v;
  }

  std::uint32_t count(std::uint8_t tag, std::uint32_t max) {
    const auto v = field(tag);
    if (v.size() != 4) throw DecodeError(DecodeFailure::Malformed, "count field width");
    const std::uint32_t n = get_u32(v);
    if (n > max) throw DecodeError(DecodeFailure::Malformed, "count " + std::to_string(n));
    return n;
  }

  template <typename E>
  E element(std::uint8_t tag) {
    const auto v = field(tag);
    if (v.size() != E::kEncodedSize) {
      throw DecodeError(DecodeFailure::Malformed, "element width");
    }
    auto e = E::decode(v);
    if (!e) throw DecodeError(DecodeFailure::InvalidElement, "field " + std::to_string(tag));
    return *e;
  }

  Scalar scalar(std::uint8_t tag) { return element<Scalar>(tag); }

  MirroredElement mirrored(std::uint8_t tag) {
    const auto v = field(tag);
    if (v.size() != MirroredElement::kEncodedSize) {
      throw DecodeError(DecodeFailure::Malformed, "mirrored element width");
    }
    auto l = LeftElement::decode(v.first(LeftElement::kEncodedSize));
    auto r = RightElement::decode(v.subspan(LeftElement::kEncodedSize));
    if (!l || !r) throw DecodeError(DecodeFailure::InvalidElement, "field " + std::to_string(tag));
    return MirroredElement{*l, *r, std::nullopt};
  }

  std::string attribute(std::uint8_t tag) {
    const auto v = field(tag);
    std::string s(v.begin(), v.end());
    bool canonical = false;
    try {
      canonical = normalize_attribute(s) == s;
    } catch (const Error&) {
    }
    if (!canonical) throw DecodeError(DecodeFailure::Malformed, "attribute not in canonical form");
    return s;
  }

  void finish() const {
    if (pos_ != bytes_.size()) throw DecodeError(DecodeFailure::Malformed, "trailing bytes");
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  CurveId curve_ = CurveId::Bls12_381;
};

// ------------------------------------------------------------- policies

void write_node(const PolicyAst& n, std::vector<std::uint8_t>& out) {
  if (n.is_leaf()) {
    out.push_back(0x00);
    put_u32(out, checked_length(n.attribute.size()));
    out.insert(out.end(), n.attribute.begin(), n.attribute.end());
    return;
  }
  out.push_back(0x01);
  put_u32(out, n.threshold);
  put_u32(out, checked_length(n.children.size()));
  for (const auto& c : n.children) write_node(c, out);
}

class PolicyReader {
 public:
  explicit PolicyReader(std::span<const std::uint8_t> b) : b_(b) {}

  PolicyAst read(std::size_t level) {
    if (level > policy::kMaxDepth) throw DecodeError(DecodeFailure::Malformed, "policy too deep");
    const std::uint8_t kind = take(1)[0];
    if (kind == 0x00) {
      if (++leaves_ > policy::kMaxLeaves) {
        throw DecodeError(DecodeFailure::Malformed, "policy has too many leaves");
      }
      const std::uint32_t len = get_u32(take(4));
      const auto s = take(len);
      return PolicyAst::leaf(std::string(s.begin(), s.end()));
    }
    if (kind != 0x01) throw DecodeError(DecodeFailure::Malformed, "policy node kind");
    const std::uint32_t k = get_u32(take(4));
    const std::uint32_t n = get_u32(take(4));
    if (n == 0 || k == 0 || k > n || n > policy::kMaxLeaves) {
      throw DecodeError(DecodeFailure::Malformed, "policy gate shape");
    }
    std::vector<PolicyAst> children;
    children.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) children.push_back(read(level + 1));
    return PolicyAst::gate(k, std::move(children));
  }

  bool done() const { return pos_ == b_.size(); }

 private:
  std::span<const std::uint8_t> take(std::size_t n) {
    if (b_.size() - pos_ < n) throw DecodeError(DecodeFailure::Truncated, "policy");
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
  std::size_t leaves_ = 0;
};

void write_components(Writer& w, const std::vector<KeyComponent>& comps) {
  w.count(0x02, comps.size());
  for (const auto& c : comps) {
    w.field(0x03, c.attribute).element(0x04, c.d).element(0x05, c.d_prime);
  }
}

std::vector<KeyComponent> read_components(Reader& r) {
  const std::uint32_t n = r.count(0x02, kMaxComponents);
  if (n == 0) throw DecodeError(DecodeFailure::Malformed, "key without attributes");
  std::vector<KeyComponent> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string attr = r.attribute(0x03);
    if (!out.empty() && !(out.back().attribute < attr)) {
      throw DecodeError(DecodeFailure::Malformed, "key attributes not strictly ascending");
    }
    auto d = r.element<LeftElement>(0x04);
    auto dp = r.element<RightElement>(0x05);
    out.push_back({std::move(attr), d, dp});
  }
  return out;
}

Writer ciphertext_fields(const Ciphertext& v) {
  Writer w(ObjectTag::Ciphertext, v.curve);
  w.field(0x01, encode_policy(v.tree))
      .element(0x02, v.c_tilde)
      .element(0x03, v.c0)
      .element(0x04, v.c1)
      .count(0x05, v.leaves.size());
  for (const auto& l : v.leaves) w.element(0x06, l.c).element(0x07, l.c_prime);
  return w;
}

}  // namespace

std::vector<std::uint8_t> encode_policy(const PolicyAst& ast) {
  std::vector<std::uint8_t> out;
  write_node(ast, out);
  return out;
}

PolicyAst decode_policy(std::span<const std::uint8_t> bytes) {
  PolicyReader r(bytes);
  PolicyAst ast = r.read(1);
  if (!r.done()) throw DecodeError(DecodeFailure::Malformed, "trailing policy bytes");
  try {
    policy::validate(ast);
  } catch (const Error& e) {
    throw DecodeError(DecodeFailure::Malformed, e.what());
  }
  return ast;
}

ObjectTag peek_tag(std::span<const std::uint8_t> bytes) { return read_envelope(bytes).tag; }

// ------------------------------------------------------------ encoders

std::vector<std::uint8_t> encode(const PublicKey& v) {
  return Writer(ObjectTag::PublicKey, v.curve)
      .mirrored(0x01, v.g)
      .element(0x02, v.h)
      .element(0x03, v.egg_alpha)
      .mirrored(0x04, v.gq)
      .finish();
}

std::vector<std::uint8_t> encode(const MasterKey& v) {
  return Writer(ObjectTag::MasterKey, v.curve)
      .element(0x01, v.beta)
      .element(0x02, v.g_alpha)
      .element(0x03, v.q)
      .finish();
}

std::vector<std::uint8_t> encode(const SecretKey& v) {
  Writer w(ObjectTag::SecretKey, v.curve);
  w.element(0x01, v.d);
  write_components(w, v.components);
  return w.finish();
}

std::vector<std::uint8_t> encode(const EncryptionMachine& v) {
  Writer w(ObjectTag::EncryptionMachine, v.curve);
  w.field(0x01, encode_policy(v.tree)).element(0x02, v.root_secret).count(0x03, v.leaves.size());
  for (const auto& l : v.leaves) {
    w.element(0x04, l.c).element(0x05, l.c_prime).element(0x06, l.attribute);
  }
  return w.finish();
}

std::vector<std::uint8_t> encode(const Ciphertext& v) {
  return ciphertext_fields(v).field(0x08, v.dem).finish();
}

std::vector<std::uint8_t> encode(const TransformKey& v) {
  Writer w(ObjectTag::TransformKey, v.curve);
  w.element(0x01, v.d);
  write_components(w, v.components);
  return w.finish();
}

std::vector<std::uint8_t> encode(const RetrievalKey& v) {
  return Writer(ObjectTag::RetrievalKey, v.curve)
      .element(0x01, v.d_r)
      .element(0x02, v.d_hat_r)
      .finish();
}

std::vector<std::uint8_t> encode(const PartialDecryption& v) {
  return Writer(ObjectTag::PartialDecryption, v.curve)
      .element(0x01, v.t)
      .field(0x02, v.ciphertext_digest)
      .finish();
}

// ------------------------------------------------------------ decoders

template <>
PublicKey decode(std::span<const std::uint8_t> bytes, std::optional<CurveId> curve) {
  Reader r(bytes, ObjectTag::PublicKey, curve);
  PublicKey v;
  v.curve = r.curve();
  v.g = r.mirrored(0x01);
  v.h = r.element<LeftElement>(0x02);
  v.egg_alpha = r.element<TargetElement>(0x03);
  v.gq = r.mirrored(0x04);
  r.finish();
  return v;
}

template <>
MasterKey decode(std::span<const std::uint8_t> bytes, std::optional<CurveId> curve) {
  Reader r(bytes, ObjectTag::MasterKey, curve);
  MasterKey v;
  v.curve = r.curve();
  v.beta = r.scalar(0x01);
  if (v.beta.is_zero()) throw DecodeError(DecodeFailure::Malformed, "beta is zero");
  v.g_alpha = r.element<RightElement>(0x02);
  v.q = r.scalar(0x03);
  r.finish();
  return v;
}

template <>
SecretKey decode(std::span<const std::uint8_t> bytes, std::optional<CurveId> curve) {
  Reader r(bytes, ObjectTag::SecretKey, curve);
  SecretKey v;
  v.curve = r.curve();
  v.d = r.element<RightElement>(0x01);
  v.components = read_components(r);
  r.finish();
  return v;
}

template <>
EncryptionMachine decode(std::span<const std::uint8_t> bytes, std::optional<CurveId> curve) {
  Reader r(bytes, ObjectTag::EncryptionMachine, curve);
  EncryptionMachine v;
  v.curve = r.curve();
  v.tree = decode_policy(r.field(0x01));
  v.root_secret = r.scalar(0x02);
  const std::uint32_t n = r.count(0x03, policy::kMaxLeaves);
  if (n != policy::leaf_count(v.tree)) {
    throw DecodeError(DecodeFailure::Malformed, "leaf count does not match the access tree");
  }
  v.leaves.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto c = r.element<RightElement>(0x04);
    auto cp = r.element<LeftElement>(0x05);
    auto a = r.element<LeftElement>(0x06);
    v.leaves.push_back({c, cp, a});
  }
  r.finish();
  return v;
}

template <>
Ciphertext decode(std::span<const std::uint8_t> bytes, std::optional<CurveId> curve) {
  Reader r(bytes, ObjectTag::Ciphertext, curve);
  Ciphertext v;
  v.curve = r.curve();
  v.tree = decode_policy(r.field(0x01));
  v.c_tilde = r.element<TargetElement>(0x02);
  v.c0 = r.element<LeftElement>(0x03);
  v.c1 = r.element<LeftElement>(0x04);
  const std::uint32_t n = r.count(0x05, policy::kMaxLeaves);
  if (n != policy::leaf_count(v.tree)) {
    throw DecodeError(DecodeFailure::Malformed, "leaf count does not match the access tree");
  }
  v.leaves.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto c = r.element<RightElement>(0x06);
    auto cp = r.element<LeftElement>(0x07);
    v.leaves.push_back({c, cp});
  }
  const auto blob = r.field(0x08);
  if (blob.empty()) throw DecodeError(DecodeFailure::Malformed, "empty payload blob");
  v.dem.assign(blob.begin(), blob.end());
  r.finish();
  return v;
}

template <>
TransformKey decode(std::span<const std::uint8_t> bytes, std::optional<CurveId> curve) {
  Reader r(bytes, ObjectTag::TransformKey, curve);
  TransformKey v;
  v.curve = r.curve();
  v.d = r.element<RightElement>(0x01);
  v.components = read_components(r);
  r.finish();
  return v;
}

template <>
RetrievalKey decode(std::span<const std::uint8_t> bytes, std::optional<CurveId> curve) {
  Reader r(bytes, ObjectTag::RetrievalKey, curve);
  RetrievalKey v;
  v.curve = r.curve();
  v.d_r = r.element<RightElement>(0x01);
  v.d_hat_r = r.element<RightElement>(0x02);
  r.finish();
  return v;
}

template <>
PartialDecryption decode(std::span<const std::uint8_t> bytes, std::optional<CurveId> curve) {
  Reader r(bytes, ObjectTag::PartialDecryption, curve);
  PartialDecryption v;
  v.curve = r.curve();
  v.t = r.element<TargetElement>(0x01);
  const auto digest = r.field(0x02);
  if (digest.size() != v.ciphertext_digest.size()) {
    throw DecodeError(DecodeFailure::Malformed, "digest width");
  }
  std::copy(digest.begin(), digest.end(), v.ciphertext_digest.begin());
  r.finish();
  return v;
}

// --------------------------------------------------------------- armor

namespace {

constexpr std::string_view kBegin = "-----BEGIN ABEM ";
constexpr std::string_view kEnd = "-----END ABEM ";
constexpr std::string_view kFenceTail = "-----";

}  // namespace

std::string armor(std::span<const std::uint8_t> encoded) {
  const ObjectTag tag = peek_tag(encoded);
  const std::string kind(kind_name(tag));

  std::string b64(4 * ((encoded.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(b64.data()), encoded.data(),
                                static_cast<int>(encoded.size()));
  b64.resize(static_cast<std::size_t>(n));

  std::string out;
  out.reserve(b64.size() + b64.size() / 64 + 96);
  out.append(kBegin).append(kind).append(kFenceTail).push_back('\n');
  for (std::size_t i = 0; i < b64.size(); i += 64) {
    out.append(b64, i, 64).push_back('\n');
  }
  out.append(kEnd).append(kind).append(kFenceTail).push_back('\n');
  return out;
}

bool looks_armored(std::span<const std::uint8_t> bytes) {
  std::string_view s(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  const auto first = s.find_first_not_of(" \t\r\n");
  return first != std::string_view::npos && s.substr(first).starts_with(kBegin);
}

std::vector<std::uint8_t> dearmor(std::string_view text) {
  const auto begin = text.find(kBegin);
  if (begin == std::string_view::npos) {
    throw DecodeError(DecodeFailure::BadMagic, "missing armor header");
  }
  const auto kind_start = begin + kBegin.size();
  const auto kind_end = text.find(kFenceTail, kind_start);
  if (kind_end == std::string_view::npos) throw DecodeError(DecodeFailure::Malformed, "armor header");
  const std::string kind(text.substr(kind_start, kind_end - kind_start));
  const std::string end_fence = std::string(kEnd) + kind + std::string(kFenceTail);
  const auto body_start = kind_end + kFenceTail.size();
  const auto end = text.find(end_fence, body_start);
  if (end == std::string_view::npos) throw DecodeError(DecodeFailure::Truncated, "armor footer");

  std::string b64;
  for (char c : text.substr(body_start, end - body_start)) {
    if (!std::isspace(static_cast<unsigned char>(c))) b64.push_back(c);
  }
  if (b64.size() % 4 != 0) throw DecodeError(DecodeFailure::Malformed, "armor base64 length");

  std::vector<std::uint8_t> out(b64.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(b64.data()),
                                static_cast<int>(b64.size()));
  if (n < 0) throw DecodeError(DecodeFailure::Malformed, "armor base64");
  std::size_t pad = 0;
  if (!b64.empty() && b64.back() == '=') ++pad;
  if (b64.size() >= 2 && b64[b64.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);

  if (kind_name(peek_tag(out)) != kind) {
    throw DecodeError(DecodeFailure::TagMismatch, "armor kind does not match object tag");
  }
  return out;
}

}  // namespace abem::codec

namespace abem::detail {

std::vector<std::uint8_t> header_bytes(const Ciphertext& ct) {
  return codec::ciphertext_fields(ct).finish();
}

}  // namespace abem::detail
