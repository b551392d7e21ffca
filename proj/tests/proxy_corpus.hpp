#pragma once

// Golden frames and malformed byte streams for the transform protocol.

#include <cstdint>
#include <string>
#include <vector>

#include "abem/codec.hpp"
#include "abem/proxy.hpp"

namespace corpus {

using Bytes = std::vector<std::uint8_t>;

struct Golden {
  std::string name;
  abem::proxy::Frame frame;
  Bytes wire;
};

inline std::vector<Golden> golden_frames() {
  using abem::proxy::Frame;
  return {
      {"request", Frame{0x01, abem::proxy::encode_request(Bytes{0xAA}, Bytes{0xBB, 0xCC})},
       {0x00, 0x00, 0x00, 0x0C, 0x01, 0x00, 0x00, 0x00, 0x01, 0xAA, 0x00, 0x00, 0x00, 0x02, 0xBB, 0xCC}},
      {"ok", Frame{0x81, {0x01, 0x02, 0x03}}, {0x00, 0x00, 0x00, 0x04, 0x81, 0x01, 0x02, 0x03}},
      {"not satisfied", Frame{0x82, {}}, {0x00, 0x00, 0x00, 0x01, 0x82}},
      {"error", Frame{0xFF, abem::proxy::encode_error(0x0002, "bad")},
       {0x00, 0x00, 0x00, 0x06, 0xFF, 0x00, 0x02, 'b', 'a', 'd'}},
  };
}

struct Malformed {
  std::string name;
  Bytes stream;  // sent, then the client half-closes
  std::uint16_t code;
};

inline Bytes be32(std::uint32_t v) {
  return {std::uint8_t(v >> 24), std::uint8_t(v >> 16), std::uint8_t(v >> 8), std::uint8_t(v)};
}

inline Bytes cat(std::initializer_list<Bytes> parts) {
  Bytes out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

inline Bytes request_frame(const Bytes& tk, const Bytes& ct) {
  return abem::proxy::encode_frame(0x01, abem::proxy::encode_request(tk, ct));
}

/// `tk`, `ct` are valid encodings; the others are other kinds to smuggle in.
inline std::vector<Malformed> malformed_frames(const Bytes& tk, const Bytes& ct, const Bytes& sk,
                                               const Bytes& mk, const Bytes& rk) {
  auto with = [](Bytes b, std::size_t i, std::uint8_t v) {
    b[i] = v;
    return b;
  };
  auto flip = [](Bytes b, std::size_t i) {
    b[i] ^= 0xFF;
    return b;
  };
  Bytes ct_trailing = ct;
  ct_trailing.push_back(0);
  const Bytes valid_body = abem::proxy::encode_request(tk, ct);

  return {
      {"five garbage bytes", {0x00, 0x00, 0x00, 0x01, 0x42}, 0x0002},
      {"zero length", {0x00, 0x00, 0x00, 0x00}, 0x0002},
      {"length above maximum", cat({be32((1u << 26) + 1), Bytes(16, 0)}), 0x0001},
      {"length all ones", {0xFF, 0xFF, 0xFF, 0xFF, 0x01}, 0x0001},
      {"response type as request", {0x00, 0x00, 0x00, 0x01, 0x81}, 0x0002},
      {"not-satisfied type as request", {0x00, 0x00, 0x00, 0x01, 0x82}, 0x0002},
      {"error type as request", {0x00, 0x00, 0x00, 0x03, 0xFF, 0x00, 0x01}, 0x0002},
      {"unknown type 0x55", cat({be32(1 + valid_body.size()), {0x55}, valid_body}), 0x0002},
      {"request without body", {0x00, 0x00, 0x00, 0x01, 0x01}, 0x0002},
      {"request with partial length", {0x00, 0x00, 0x00, 0x03, 0x01, 0x00, 0x00}, 0x0002},
      {"tk length past body", cat({be32(1 + 4 + 2), {0x01}, be32(100), {0xAA, 0xBB}}), 0x0002},
      {"ct length missing", abem::proxy::encode_frame(0x01, cat({be32(tk.size()), tk})), 0x0002},
      {"bytes after ct", abem::proxy::encode_frame(0x01, cat({valid_body, {0x00}})), 0x0002},
      {"secret key as tk", request_frame(sk, ct), 0x0002},
      {"master key as tk", request_frame(mk, ct), 0x0002},
      {"retrieval key as tk", request_frame(rk, ct), 0x0002},
      {"tk and ct swapped", request_frame(ct, tk), 0x0002},
      {"tk bad magic", request_frame(with(tk, 0, 'X'), ct), 0x0002},
      {"tk unknown version", request_frame(with(tk, 4, 0x02), ct), 0x0002},
      {"ct unknown curve", request_frame(tk, with(ct, 6, 0x02)), 0x0002},
      {"ct truncated", request_frame(tk, Bytes(ct.begin(), ct.end() - 1)), 0x0002},
      {"ct trailing byte", request_frame(tk, ct_trailing), 0x0002},
      {"tk corrupted element", request_frame(flip(tk, 20), ct), 0x0002},
      {"empty tk and ct", request_frame({}, {}), 0x0002},
      {"frame cut mid-body", cat({be32(100), {0x01}, Bytes(10, 0)}), 0x0002},
      {"header cut short", {0x00, 0x00}, 0x0002},
  };
}

}  // namespace corpus
