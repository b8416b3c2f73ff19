#pragma once

#include <cstdint>
#include <random>

namespace aggsplit {

/// Portable seeded stream. std::mt19937_64 is specified bit-exactly by the
/// standard; the distributions are not, so uniforms are built by hand from
/// the top 53 bits. Streams are keyed by (seed, stream id) through
/// splitmix64, so agent i always draws from the same stream regardless of N.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix(seed, stream)) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  static std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  }
  std::mt19937_64 engine_;
};

}  // namespace aggsplit
