#pragma once

#include <cstddef>
#include <cstdint>

namespace das {

/// Counter-based random stream. Output i is a pure function of (key, i), so a
/// stream derived from (seed, trial, purpose) yields the same draws no matter
/// which thread runs the trial or what other trials consumed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) noexcept : key_(key) {}

  /// Derives an independent stream key from a root seed and up to two ids.
  static RandomStream derive(std::uint64_t seed, std::uint64_t id, std::uint64_t purpose = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double next_uniform() noexcept;
  /// Standard normal via Box-Muller; the second variate is cached.
  double next_normal() noexcept;
  /// Uniform integer in [0, n). n must be positive.
  std::size_t next_index(std::size_t n) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace das
