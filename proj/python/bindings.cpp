// Python bindings. Every object crosses the boundary in its binary encoding.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "abem/bench.hpp"
#include "abem/codec.hpp"
#include "abem/errors.hpp"
#include "abem/outsource.hpp"
#include "abem/proxy.hpp"
#include "abem/scheme.hpp"

namespace py = pybind11;
using namespace abem;

namespace {

using Seed = std::optional<std::string>;

std::unique_ptr<RandomSource> rng_for(const Seed& seed) {
  if (seed) return std::make_unique<SeededRandom>(*seed);
  return std::make_unique<SystemRandom>();
}

std::vector<std::uint8_t> raw(const py::bytes& b) {
  const std::string_view s = b;
  return {s.begin(), s.end()};
}

py::bytes out(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

template <typename T>
T load(const py::bytes& b) {
  const auto bytes = raw(b);
  return codec::decode<T>(bytes, default_curve());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Attribute-based encryption with cached encryption machines and outsourced decryption";

  static py::exception<Error> base(m, "AbemError");
  static py::exception<Error> usage(m, "UsageError", base.ptr());
  static py::exception<Error> decode(m, "DecodeError", base.ptr());
  static py::exception<Error> unsatisfied(m, "UnsatisfiedError", base.ptr());
  static py::exception<Error> authentication(m, "AuthenticationError", base.ptr());
  static py::exception<Error> verification(m, "VerificationError", base.ptr());
  static py::exception<Error> echo(m, "EchoMismatchError", verification.ptr());
  static py::exception<Error> network(m, "NetworkError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::Usage: py::set_error(usage, e.what()); return;
        case ErrorKind::Decode: py::set_error(decode, e.what()); return;
        case ErrorKind::Unsatisfied: py::set_error(unsatisfied, e.what()); return;
        case ErrorKind::Authentication: py::set_error(authentication, e.what()); return;
        case ErrorKind::Verification: py::set_error(verification, e.what()); return;
        case ErrorKind::EchoMismatch: py::set_error(echo, e.what()); return;
        case ErrorKind::Network: py::set_error(network, e.what()); return;
        default: py::set_error(base, e.what()); return;
      }
    }
  });

  m.def("setup", [](const Seed& seed) {
    auto rng = rng_for(seed);
    const auto kp = setup(*rng, default_curve());
    return py::make_tuple(out(codec::encode(kp.pk)), out(codec::encode(kp.mk)));
  }, py::arg("seed") = py::none(), "Returns (public key, master key).");

  m.def("keygen", [](const py::bytes& pk, const py::bytes& mk, const std::vector<std::string>& attrs,
                     const Seed& seed) {
    auto rng = rng_for(seed);
    return out(codec::encode(keygen(load<PublicKey>(pk), load<MasterKey>(mk), attrs, *rng)));
  }, py::arg("pk"), py::arg("mk"), py::arg("attributes"), py::arg("seed") = py::none());

  m.def("build_em", [](const py::bytes& pk, const std::string& policy, const Seed& seed) {
    auto rng = rng_for(seed);
    return out(codec::encode(build_em(load<PublicKey>(pk), policy::parse_policy(policy), *rng)));
  }, py::arg("pk"), py::arg("policy"), py::arg("seed") = py::none());

  m.def("em_encrypt", [](const py::bytes& pk, const py::bytes& em, const py::bytes& msg, const Seed& seed) {
    auto rng = rng_for(seed);
    return out(codec::encode(em_encrypt(load<PublicKey>(pk), load<EncryptionMachine>(em), raw(msg), *rng)));
  }, py::arg("pk"), py::arg("em"), py::arg("message"), py::arg("seed") = py::none());

  m.def("encrypt", [](const py::bytes& pk, const std::string& policy, const py::bytes& msg, const Seed& seed) {
    auto rng = rng_for(seed);
    return out(codec::encode(encrypt(load<PublicKey>(pk), policy::parse_policy(policy), raw(msg), *rng)));
  }, py::arg("pk"), py::arg("policy"), py::arg("message"), py::arg("seed") = py::none());

  m.def("decrypt", [](const py::bytes& pk, const py::bytes& sk, const py::bytes& ct) {
    return out(decrypt(load<PublicKey>(pk), load<SecretKey>(sk), load<Ciphertext>(ct)));
  }, py::arg("pk"), py::arg("sk"), py::arg("ct"));

  m.def("gen_tk", [](const py::bytes& pk, const py::bytes& sk, const Seed& seed) {
    auto rng = rng_for(seed);
    const auto pair = gen_tk(load<PublicKey>(pk), load<SecretKey>(sk), *rng);
    return py::make_tuple(out(codec::encode(pair.tk)), out(codec::encode(pair.rk)));
  }, py::arg("pk"), py::arg("sk"), py::arg("seed") = py::none(), "Returns (transform key, retrieval key).");

  m.def("transform", [](const py::bytes& tk, const py::bytes& ct, const std::optional<std::string>& proxy_addr,
                        int timeout_ms) -> std::optional<py::bytes> {
    const auto key = load<TransformKey>(tk);
    const auto c = load<Ciphertext>(ct);
    const auto partial = proxy_addr
                             ? proxy::client_transform(*proxy_addr, key, c, std::chrono::milliseconds(timeout_ms))
                             : transform(key, c);
    if (!partial) return std::nullopt;
    return out(codec::encode(*partial));
  }, py::arg("tk"), py::arg("ct"), py::arg("proxy") = py::none(), py::arg("timeout_ms") = 30000,
     "Partial decryption, or None when the key does not satisfy the policy.");

  m.def("recover", [](const py::bytes& pk, const py::bytes& rk, const py::bytes& ct, const py::bytes& partial) {
    return out(recover(load<PublicKey>(pk), load<RetrievalKey>(rk), load<Ciphertext>(ct),
                       load<PartialDecryption>(partial)));
  }, py::arg("pk"), py::arg("rk"), py::arg("ct"), py::arg("partial"));

  m.def("armor", [](const py::bytes& b) { return codec::armor(raw(b)); });
  m.def("dearmor", [](const std::string& text) { return out(codec::dearmor(text)); });
  m.def("kind", [](const py::bytes& b) { return std::string(codec::kind_name(codec::peek_tag(raw(b)))); });

  m.def("normalize_policy", [](const std::string& text) { return policy::to_string(policy::parse_policy(text)); });
  m.def("gen_random_tree", [](std::size_t levels, std::size_t leaves, const Seed& seed) {
    auto rng = rng_for(seed);
    const auto t = bench::gen_random_tree(levels, leaves, *rng);
    return py::make_tuple(t.text, std::vector<std::string>(t.satisfying.begin(), t.satisfying.end()));
  }, py::arg("levels"), py::arg("leaves"), py::arg("seed") = py::none());
}
