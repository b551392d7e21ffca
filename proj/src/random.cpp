#include "abem/random.hpp"

#include <algorithm>
#include <climits>

#include <openssl/rand.h>

#include "abem/errors.hpp"
#include "digest.hpp"

namespace abem {

void SystemRandom::fill(std::span<std::uint8_t> out) {
  while (!out.empty()) {
    const std::size_t chunk = std::min<std::size_t>(out.size(), INT_MAX);
    if (RAND_bytes(out.data(), static_cast<int>(chunk)) != 1) {
      throw Error(ErrorKind::Randomness, "RAND_bytes failed");
    }
    out = out.subspan(chunk);
  }
}

SeededRandom::SeededRandom(std::uint64_t seed) {
  std::array<std::uint8_t, 8> b{};
  for (int i = 7; i >= 0; --i, seed >>= 8) b[i] = static_cast<std::uint8_t>(seed);
  key_ = detail::make_sha256().update("ABEM/seeded-rng").update(b).finish();
}

SeededRandom::SeededRandom(std::string_view seed) {
  key_ = detail::make_sha256().update("ABEM/seeded-rng").update(seed).finish();
}

void SeededRandom::refill() {
  std::array<std::uint8_t, 8> ctr{};
  std::uint64_t c = counter_++;
  for (int i = 7; i >= 0; --i, c >>= 8) ctr[i] = static_cast<std::uint8_t>(c);
  block_ = detail::make_sha256().update(key_).update(ctr).finish();
  used_ = 0;
}

void SeededRandom::fill(std::span<std::uint8_t> out) {
  while (!out.empty()) {
    if (used_ == block_.size()) refill();
    const std::size_t n = std::min(out.size(), block_.size() - used_);
    std::copy_n(block_.begin() + static_cast<std::ptrdiff_t>(used_), n, out.begin());
    used_ += n;
    out = out.subspan(n);
  }
}

}  // namespace abem
