#include "abem/bilinear.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "abem/errors.hpp"
#include "digest.hpp"

namespace abem {

std::string_view curve_name(CurveId id) {
  switch (id) {
    case CurveId::Bls12_381: return "bls12-381";
  }
  return "unknown";
}

CurveId curve_from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "bls12-381" || lower == "bls12_381" || lower == "bls12381") {
    return CurveId::Bls12_381;
  }
  throw Error(ErrorKind::Usage, "unsupported curve '" + std::string(name) + "'");
}

CurveId default_curve() {
  const char* env = std::getenv("ABEM_CURVE");
  if (env == nullptr || *env == '\0') return CurveId::Bls12_381;
  return curve_from_name(env);
}

// ---------------------------------------------------------------- Scalar

namespace {

Scalar scalar_from_wide(std::span<const std::uint8_t> be) {
  blst_scalar s;
  blst_scalar_from_be_bytes(&s, be.data(), be.size());  // reduces mod r
  return Scalar::from_blst(s);
}

}  // namespace

Scalar::Scalar() { std::memset(&fr_, 0, sizeof(fr_)); }

Scalar Scalar::from_blst(const blst_scalar& s) {
  Scalar out;
  blst_fr_from_scalar(&out.fr_, &s);
  return out;
}

Scalar Scalar::from_u64(std::uint64_t v) {
  const std::uint64_t limbs[4] = {v, 0, 0, 0};
  Scalar s;
  blst_fr_from_uint64(&s.fr_, limbs);
  return s;
}

Scalar Scalar::random(RandomSource& rng) {
  // 512 bits reduced mod r: bias below 2^-256.
  std::array<std::uint8_t, 64> buf{};
  rng.fill(buf);
  return scalar_from_wide(buf);
}

Scalar Scalar::random_nonzero(RandomSource& rng) {
  for (;;) {
    Scalar s = random(rng);
    if (!s.is_zero()) return s;
  }
}

Scalar Scalar::hash_to(std::string_view domain_tag,
                       std::span<const std::uint8_t> data) {
  const auto wide =
      detail::make_sha512().update_prefixed(domain_tag).update(data).finish();
  return scalar_from_wide(wide);
}

std::optional<Scalar> Scalar::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kEncodedSize) return std::nullopt;
  blst_scalar s;
  blst_scalar_from_bendian(&s, bytes.data());
  if (!blst_scalar_fr_check(&s)) return std::nullopt;
  Scalar out;
  blst_fr_from_scalar(&out.fr_, &s);
  return out;
}

Scalar::Bytes Scalar::encode() const {
  Bytes out{};
  blst_scalar s = to_blst_scalar();
  blst_bendian_from_scalar(out.data(), &s);
  return out;
}

blst_scalar Scalar::to_blst_scalar() const {
  blst_scalar s;
  blst_scalar_from_fr(&s, &fr_);
  return s;
}

bool Scalar::is_zero() const {
  const Bytes b = encode();
  return std::all_of(b.begin(), b.end(), [](std::uint8_t v) { return v == 0; });
}

Scalar Scalar::inverse() const {
  if (is_zero()) throw std::domain_error("inverse of zero scalar");
  Scalar out;
  blst_fr_inverse(&out.fr_, &fr_);
  return out;
}

Scalar Scalar::operator+(const Scalar& o) const {
  Scalar out;
  blst_fr_add(&out.fr_, &fr_, &o.fr_);
  return out;
}

Scalar Scalar::operator-(const Scalar& o) const {
  Scalar out;
  blst_fr_sub(&out.fr_, &fr_, &o.fr_);
  return out;
}

Scalar Scalar::operator*(const Scalar& o) const {
  Scalar out;
  blst_fr_mul(&out.fr_, &fr_, &o.fr_);
  return out;
}

Scalar Scalar::operator-() const {
  Scalar out;
  blst_fr_cneg(&out.fr_, &fr_, true);
  return out;
}

bool operator==(const Scalar& a, const Scalar& b) { return a.encode() == b.encode(); }

// ---------------------------------------------------------- LeftElement

LeftElement::LeftElement() { std::memset(&p_, 0, sizeof(p_)); }

LeftElement LeftElement::from_raw(const blst_p1& p) {
  LeftElement e;
  e.p_ = p;
  return e;
}

LeftElement LeftElement::generator() {
  LeftElement e;
  e.p_ = *blst_p1_generator();
  return e;
}

LeftElement LeftElement::operator*(const LeftElement& o) const {
  LeftElement out;
  blst_p1_add_or_double(&out.p_, &p_, &o.p_);
  return out;
}

LeftElement LeftElement::pow(const Scalar& k) const {
  LeftElement out;
  const blst_scalar s = k.to_blst_scalar();
  blst_p1_mult(&out.p_, &p_, s.b, 255);
  return out;
}

LeftElement LeftElement::inverse() const {
  LeftElement out = *this;
  blst_p1_cneg(&out.p_, true);
  return out;
}

bool LeftElement::is_identity() const { return blst_p1_is_inf(&p_); }

LeftElement::Bytes LeftElement::encode() const {
  Bytes out{};
  blst_p1_compress(out.data(), &p_);
  return out;
}

std::optional<LeftElement> LeftElement::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kEncodedSize) return std::nullopt;
  blst_p1_affine aff;
  if (blst_p1_uncompress(&aff, bytes.data()) != BLST_SUCCESS) return std::nullopt;
  if (!blst_p1_affine_in_g1(&aff)) return std::nullopt;
  LeftElement out;
  blst_p1_from_affine(&out.p_, &aff);
  if (!std::equal(bytes.begin(), bytes.end(), out.encode().begin())) {
    return std::nullopt;  // non-canonical
  }
  return out;
}

bool operator==(const LeftElement& a, const LeftElement& b) {
  return blst_p1_is_equal(&a.p_, &b.p_);
}

blst_p1_affine LeftElement::to_affine() const {
  blst_p1_affine aff;
  blst_p1_to_affine(&aff, &p_);
  return aff;
}

// --------------------------------------------------------- RightElement

RightElement::RightElement() { std::memset(&p_, 0, sizeof(p_)); }

RightElement RightElement::generator() {
  RightElement e;
  e.p_ = *blst_p2_generator();
  return e;
}

RightElement RightElement::operator*(const RightElement& o) const {
  RightElement out;
  blst_p2_add_or_double(&out.p_, &p_, &o.p_);
  return out;
}

RightElement RightElement::pow(const Scalar& k) const {
  RightElement out;
  const blst_scalar s = k.to_blst_scalar();
  blst_p2_mult(&out.p_, &p_, s.b, 255);
  return out;
}

RightElement RightElement::inverse() const {
  RightElement out = *this;
  blst_p2_cneg(&out.p_, true);
  return out;
}

bool RightElement::is_identity() const { return blst_p2_is_inf(&p_); }

RightElement::Bytes RightElement::encode() const {
  Bytes out{};
  blst_p2_compress(out.data(), &p_);
  return out;
}

std::optional<RightElement> RightElement::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kEncodedSize) return std::nullopt;
  blst_p2_affine aff;
  if (blst_p2_uncompress(&aff, bytes.data()) != BLST_SUCCESS) return std::nullopt;
  if (!blst_p2_affine_in_g2(&aff)) return std::nullopt;
  RightElement out;
  blst_p2_from_affine(&out.p_, &aff);
  if (!std::equal(bytes.begin(), bytes.end(), out.encode().begin())) {
    return std::nullopt;
  }
  return out;
}

bool operator==(const RightElement& a, const RightElement& b) {
  return blst_p2_is_equal(&a.p_, &b.p_);
}

blst_p2_affine RightElement::to_affine() const {
  blst_p2_affine aff;
  blst_p2_to_affine(&aff, &p_);
  return aff;
}

// -------------------------------------------------------- TargetElement

TargetElement::TargetElement() : f_(*blst_fp12_one()) {}

TargetElement TargetElement::from_raw(const blst_fp12& f) {
  TargetElement e;
  e.f_ = f;
  return e;
}

const TargetElement& TargetElement::generator() {
  static const TargetElement g = pair(LeftElement::generator(), RightElement::generator());
  return g;
}

TargetElement TargetElement::random(RandomSource& rng) {
  return generator().pow(Scalar::random_nonzero(rng));
}

TargetElement TargetElement::operator*(const TargetElement& o) const {
  TargetElement out;
  blst_fp12_mul(&out.f_, &f_, &o.f_);
  return out;
}

TargetElement TargetElement::operator/(const TargetElement& o) const {
  return *this * o.inverse();
}

TargetElement TargetElement::inverse() const {
  // GT lies in the cyclotomic subgroup, where inversion is conjugation.
  TargetElement out = *this;
  blst_fp12_conjugate(&out.f_);
  return out;
}

TargetElement TargetElement::pow(const Scalar& k) const {
  const blst_scalar s = k.to_blst_scalar();  // little-endian bytes

  // Fixed 4-bit window.
  std::array<blst_fp12, 16> table;
  table[0] = *blst_fp12_one();
  table[1] = f_;
  for (std::size_t i = 2; i < table.size(); ++i) {
    blst_fp12_mul(&table[i], &table[i - 1], &f_);
  }

  blst_fp12 acc = *blst_fp12_one();
  bool started = false;
  for (int byte = 31; byte >= 0; --byte) {
    for (int half = 1; half >= 0; --half) {
      const unsigned nibble = (s.b[byte] >> (4 * half)) & 0x0f;
      if (started) {
        for (int i = 0; i < 4; ++i) blst_fp12_cyclotomic_sqr(&acc, &acc);
      }
      if (nibble != 0) {
        blst_fp12_mul(&acc, &acc, &table[nibble]);
        started = true;
      }
    }
  }
  return from_raw(acc);
}

bool TargetElement::is_identity() const { return blst_fp12_is_one(&f_); }

namespace {

template <typename Fn>
void for_each_fp(const blst_fp12& f, Fn&& fn) {
  for (const auto& f6 : f.fp6)
    for (const auto& f2 : f6.fp2)
      for (const auto& fp : f2.fp) fn(fp);
}

template <typename Fn>
void for_each_fp(blst_fp12& f, Fn&& fn) {
  for (auto& f6 : f.fp6)
    for (auto& f2 : f6.fp2)
      for (auto& fp : f2.fp) fn(fp);
}

}  // namespace

TargetElement::Bytes TargetElement::encode() const {
  Bytes out{};
  std::size_t off = 0;
  for_each_fp(f_, [&](const blst_fp& fp) {
    blst_bendian_from_fp(out.data() + off, &fp);
    off += 48;
  });
  return out;
}

std::optional<TargetElement> TargetElement::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kEncodedSize) return std::nullopt;
  TargetElement out;
  std::size_t off = 0;
  bool canonical = true;
  for_each_fp(out.f_, [&](blst_fp& fp) {
    blst_fp_from_bendian(&fp, bytes.data() + off);
    std::array<std::uint8_t, 48> back{};
    blst_bendian_from_fp(back.data(), &fp);
    canonical = canonical && std::equal(back.begin(), back.end(), bytes.begin() + off);
    off += 48;
  });
  if (!canonical || !blst_fp12_in_group(&out.f_)) return std::nullopt;
  return out;
}

bool operator==(const TargetElement& a, const TargetElement& b) {
  return blst_fp12_is_equal(&a.f_, &b.f_);
}

// ------------------------------------------------------ MirroredElement

MirroredElement MirroredElement::from_exponent(const Scalar& k) {
  return MirroredElement{LeftElement::generator().pow(k),
                         RightElement::generator().pow(k), k};
}

bool MirroredElement::consistent() const {
  return pair(left, RightElement::generator()) == pair(LeftElement::generator(), right);
}

// -------------------------------------------------------------- pairing

TargetElement pair(const LeftElement& a, const RightElement& b) {
  const std::pair<LeftElement, RightElement> term{a, b};
  return pair_product(std::span(&term, 1));
}

TargetElement pair_product(std::span<const std::pair<LeftElement, RightElement>> terms) {
  std::vector<blst_p1_affine> ps;
  std::vector<blst_p2_affine> qs;
  ps.reserve(terms.size());
  qs.reserve(terms.size());
  for (const auto& [a, b] : terms) {
    // e(1, v) = e(u, 1) = 1; blst's Miller loop expects finite points.
    if (a.is_identity() || b.is_identity()) continue;
    ps.push_back(a.to_affine());
    qs.push_back(b.to_affine());
  }
  if (ps.empty()) return TargetElement::identity();

  std::vector<const blst_p1_affine*> pp;
  std::vector<const blst_p2_affine*> qp;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    pp.push_back(&ps[i]);
    qp.push_back(&qs[i]);
  }
  blst_fp12 ml;
  blst_miller_loop_n(&ml, qp.data(), pp.data(), ps.size());
  blst_fp12 out;
  blst_final_exp(&out, &ml);
  return TargetElement::from_raw(out);
}

// --------------------------------------------------------------- hashes

Scalar hash_message(std::span<const std::uint8_t> message) {
  return Scalar::hash_to(domain::kMessageHash, message);
}

std::string normalize_attribute(std::string_view attr) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto first = attr.find_first_not_of(ws);
  if (first == std::string_view::npos) {
    throw Error(ErrorKind::Usage, "empty attribute");
  }
  attr = attr.substr(first, attr.find_last_not_of(ws) - first + 1);

  const auto head_ok = [](unsigned char c) { return std::isalpha(c) || c == '_'; };
  const auto tail_ok = [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == ':' || c == '.' || c == '-';
  };
  if (!head_ok(static_cast<unsigned char>(attr.front())) ||
      !std::all_of(attr.begin() + 1, attr.end(),
                   [&](char c) { return tail_ok(static_cast<unsigned char>(c)); })) {
    throw Error(ErrorKind::Usage, "invalid attribute '" + std::string(attr) + "'");
  }
  if (attr == "and" || attr == "or" || attr == "of") {
    throw Error(ErrorKind::Usage, "attribute '" + std::string(attr) + "' is a reserved word");
  }
  return std::string(attr);
}

LeftElement attribute_element(std::string_view attr) {
  const std::string norm = normalize_attribute(attr);
  blst_p1 p;
  blst_hash_to_g1(&p, reinterpret_cast<const byte*>(norm.data()), norm.size(),
                  reinterpret_cast<const byte*>(domain::kAttributeHash.data()),
                  domain::kAttributeHash.size(), nullptr, 0);
  return LeftElement::from_raw(p);
}

}  // namespace abem
