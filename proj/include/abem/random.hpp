#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace abem {

/// Source of random bytes. Implementations throw Error(ErrorKind::Randomness)
/// when they cannot produce output; they never fall back silently.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;
};

/// Operating-system CSPRNG (OpenSSL RAND_bytes).
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Deterministic SHA-256 counter-mode stream. For tests, benchmarks and
/// `--seed` runs only: anyone who knows the seed knows every secret.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed);
  explicit SeededRandom(std::string_view seed);

  void fill(std::span<std::uint8_t> out) override;

 private:
  void refill();

  std::array<std::uint8_t, 32> key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 32> block_{};
  std::size_t used_ = block_.size();
};

}  // namespace abem
