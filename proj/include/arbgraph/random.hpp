#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace arbgraph {

// FNV-1a, used to derive named sub-stream seeds from one master seed.
constexpr std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

// splitmix64 finalizer; decorrelates master seed and stream name.
constexpr std::uint64_t mixSeed(std::uint64_t seed, std::string_view stream) {
  std::uint64_t z = seed ^ fnv1a(stream);
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Deterministic random source. Wraps mt19937_64 (whose raw output is
/// specified by the standard) and converts to doubles manually so that
/// sequences are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master_seed, std::string_view stream)
      : engine_(mixSeed(master_seed, stream)) {}

  std::uint64_t nextU64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double nextDouble() { return (engine_() >> 11) * (1.0 / 9007199254740992.0); }

  /// Uniform index in [0, n).
  std::size_t nextIndex(std::size_t n) {
    if (n <= 1) return 0;
    auto i = static_cast<std::size_t>(nextDouble() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace arbgraph
