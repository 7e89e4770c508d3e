#pragma once

#include <cstdint>

namespace polylab {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Combines a key with one more coordinate; order of coordinates matters.
constexpr std::uint64_t hash_combine(std::uint64_t key, std::uint64_t x) noexcept {
  return mix64(key ^ mix64(x + 0x632be59bd9b4e019ULL));
}

/// Counter-based stream: the k-th output is a pure function of (key, k),
/// so any stream can be rebuilt from its key alone.
class Stream {
 public:
  explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}

  /// Stream addressed by a seed and up to three integer coordinates.
  static constexpr Stream at(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                             std::uint64_t c = 0) noexcept {
    return Stream(hash_combine(hash_combine(hash_combine(mix64(seed), a), b), c));
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  /// Independent child stream.
  constexpr Stream split(std::uint64_t tag) const noexcept { return Stream(hash_combine(key_, tag)); }

  std::uint64_t next_u64() noexcept { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() noexcept;
  /// Gamma(shape, 1) by Marsaglia-Tsang squeeze; shape < 1 via the U^{1/shape} boost.
  double gamma(double shape) noexcept;
  double inverse_gamma(double shape) noexcept { return 1.0 / gamma(shape); }
  bool bernoulli(double p) noexcept { return uniform() < p; }

  // UniformRandomBitGenerator interface, for std::shuffle and friends.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() noexcept { return next_u64(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace polylab
