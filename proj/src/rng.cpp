#include "das/rng.hpp"

#include <cmath>
#include <numbers>

namespace das {

std::uint64_t mix64(std::uint64_t x) noexcept {
  // splitmix64 finaliser
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RandomStream RandomStream::derive(std::uint64_t seed, std::uint64_t id, std::uint64_t purpose) noexcept {
  return RandomStream(mix64(mix64(mix64(seed) ^ id) ^ (purpose * 0xD1B54A32D192ED03ULL)));
}

std::uint64_t RandomStream::next_u64() noexcept { return mix64(key_ ^ mix64(counter_++)); }

double RandomStream::next_uniform() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::next_normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::size_t RandomStream::next_index(std::size_t n) noexcept {
  // Rejection on the low residue class keeps x % n exactly uniform.
  const auto bound = static_cast<std::uint64_t>(n);
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= threshold) return static_cast<std::size_t>(x % bound);
  }
}

}  // namespace das
