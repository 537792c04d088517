#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace eqarm {

// Deterministic RNG and hashing used everywhere instead of <random>
// distributions, which are implementation-defined. All engine outputs must be
// reproducible byte-for-byte from (input, seed), so the generator and every
// derived draw are pinned here.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Mix a seed with a stream id to derive an independent sub-seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ull));
}

/// xoshiro256++ seeded via splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 bits of randomness.
  double next_double();

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t bounded(std::uint64_t n);

  /// Box-Muller normal draw (two uniforms consumed per call).
  double normal(double mean = 0.0, double stddev = 1.0);

  /// Independent generator derived from this one's original seed.
  Rng fork(std::uint64_t stream) const;

 private:
  std::uint64_t state_[4];
  std::uint64_t seed0_;
};

/// Fisher-Yates permutation of {0, ..., n-1}.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

std::uint64_t fnv1a64(std::string_view s);

/// Text hash mapped into [0, 1).
double hash01(std::string_view s);

}  // namespace eqarm
