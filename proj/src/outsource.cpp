#include "abem/outsource.hpp"

#include "abem/codec.hpp"
#include "abem/dem.hpp"
#include "abem/errors.hpp"
#include "digest.hpp"

namespace abem {

policy::AttributeSet TransformKey::attributes() const {
  policy::AttributeSet out;
  for (const auto& c : components) out.insert(c.attribute);
  return out;
}

CiphertextDigest ciphertext_digest(const Ciphertext& ct) {
  return detail::sha256(codec::encode(ct));
}

TransformKeyPair gen_tk(const PublicKey& pk, const SecretKey& sk, RandomSource& rng,
                        GenTkTrace* trace) {
  detail::check_curve(pk.curve, sk.curve, "secret key");
  const Scalar v = Scalar::random(rng);
  const Scalar w_over_beta = Scalar::random(rng);

  const RightElement g2v = pk.g.right.pow(v);
  const LeftElement g1w = pk.h.pow(w_over_beta);  // g1^{beta * w/beta}

  TransformKeyPair out;
  out.tk.curve = pk.curve;
  out.tk.d = sk.d * g2v;
  out.tk.components.reserve(sk.components.size());
  for (const auto& c : sk.components) {
    out.tk.components.push_back({c.attribute, c.d * g1w, c.d_prime});
  }
  out.rk = RetrievalKey{pk.curve, g2v, pk.g.right.pow(w_over_beta)};

  if (trace != nullptr) *trace = GenTkTrace{v, w_over_beta};
  return out;
}

std::optional<PartialDecryption> transform(const TransformKey& tk, const Ciphertext& ct) {
  detail::check_curve(tk.curve, ct.curve, "ciphertext");
  auto t = detail::unwrap(ct, tk.d, tk.components);
  if (!t) return std::nullopt;
  return PartialDecryption{ct.curve, *t, ciphertext_digest(ct)};
}

std::optional<PartialDecryption> transform(const PublicKey& pk, const TransformKey& tk,
                                           const Ciphertext& ct) {
  detail::check_curve(pk.curve, tk.curve, "transform key");
  return transform(tk, ct);
}

Opened recover_opened(const PublicKey& pk, const RetrievalKey& rk, const Ciphertext& ct,
                      const PartialDecryption& partial) {
  detail::check_curve(pk.curve, rk.curve, "retrieval key");
  detail::check_curve(pk.curve, ct.curve, "ciphertext");
  detail::check_curve(pk.curve, partial.curve, "partial decryption");
  if (partial.ciphertext_digest != ciphertext_digest(ct)) {
    throw Error(ErrorKind::EchoMismatch, "partial decryption was computed for another ciphertext");
  }

  // T * e(C1, D_R) / e(C1, D^_R)
  const std::pair<LeftElement, RightElement> terms[] = {
      {ct.c1, rk.d_r},
      {ct.c1.inverse(), rk.d_hat_r},
  };
  const TargetElement key = partial.t * pair_product(terms);

  dem::OpenResult opened = dem::open(key, detail::header_bytes(ct), ct.dem);
  switch (opened.status) {
    case dem::OpenStatus::Ok:
      break;
    case dem::OpenStatus::WrongKey:
      throw Error(ErrorKind::Verification,
                  "partial decryption does not unwrap the payload key; the proxy cheated");
    case dem::OpenStatus::Forged:
      throw Error(ErrorKind::Authentication, "payload failed authentication");
  }
  if (!verify_m(pk, ct, opened.message, opened.witness)) {
    throw Error(ErrorKind::Verification, "message does not match the verification tag");
  }
  return Opened{std::move(opened.message), opened.witness};
}

std::vector<std::uint8_t> recover(const PublicKey& pk, const RetrievalKey& rk,
                                  const Ciphertext& ct, const PartialDecryption& partial) {
  return recover_opened(pk, rk, ct, partial).message;
}

}  // namespace abem
