#include "digest.hpp"

#include "abem/errors.hpp"

namespace abem::detail {

template <std::size_t N>
Digest<N>::Digest(const EVP_MD* md) : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, md, nullptr) != 1 ||
      static_cast<std::size_t>(EVP_MD_size(md)) != N) {
    EVP_MD_CTX_free(ctx_);
    throw Error(ErrorKind::Internal, "digest initialisation failed");
  }
}

template <std::size_t N>
Digest<N>::~Digest() {
  EVP_MD_CTX_free(ctx_);
}

template <std::size_t N>
Digest<N>& Digest<N>::update(std::span<const std::uint8_t> data) {
  if (!data.empty() && EVP_DigestUpdate(ctx_, data.data(), data.size()) != 1) {
    throw Error(ErrorKind::Internal, "digest update failed");
  }
  return *this;
}

template <std::size_t N>
Digest<N>& Digest<N>::update(std::string_view data) {
  return update(std::span(reinterpret_cast<const std::uint8_t*>(data.data()),
                          data.size()));
}

template <std::size_t N>
Digest<N>& Digest<N>::update_prefixed(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 8> len{};
  std::uint64_t n = data.size();
  for (int i = 7; i >= 0; --i, n >>= 8) len[i] = static_cast<std::uint8_t>(n);
  update(len);
  return update(data);
}

template <std::size_t N>
Digest<N>& Digest<N>::update_prefixed(std::string_view data) {
  return update_prefixed(std::span(
      reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

template <std::size_t N>
std::array<std::uint8_t, N> Digest<N>::finish() {
  std::array<std::uint8_t, N> out{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx_, out.data(), &len) != 1 || len != N) {
    throw Error(ErrorKind::Internal, "digest finalisation failed");
  }
  return out;
}

template class Digest<32>;
template class Digest<64>;

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  return make_sha256().update(data).finish();
}

}  // namespace abem::detail
