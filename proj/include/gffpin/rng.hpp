#pragma once
// Deterministic keyed random streams: splitmix64 for seeding/stream splitting,
// xoshiro256++ as the generator. Streams are derived from a master seed plus
// integer tags (stream class, replica index, grid index, ...) so that any
// component can be re-run in isolation with bit-identical draws.
#include <array>
#include <cstdint>

#include "gffpin/common.hpp"

namespace gffpin {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  Rng() : Rng(0x853c49e6748fea9bULL) {}
  explicit Rng(std::uint64_t seed) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t nextU64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on the open interval (0,1): (x >> 11 + 0.5) * 2^-53 never hits 0 or 1,
  // so quantile transforms are always finite.
  double uniform01() {
    return (static_cast<double>(nextU64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

// Derives an independent stream from a master seed and up to four tags.
// Hashing is nonlinear (splitmix64 chain), so (seed, a, b) and (seed, a, b+1)
// give unrelated states.
inline Rng streamFor(std::uint64_t masterSeed, std::uint64_t classTag,
                     std::uint64_t tag1 = 0, std::uint64_t tag2 = 0,
                     std::uint64_t tag3 = 0) {
  std::uint64_t st = masterSeed ^ 0x5851f42d4c957f2dULL;
  std::uint64_t acc = splitmix64(st);
  for (std::uint64_t t : {classTag, tag1, tag2, tag3}) {
    st ^= t + 0x9e3779b97f4a7c15ULL + (acc << 6) + (acc >> 2);
    acc = splitmix64(st);
  }
  return Rng(acc);
}

// Stream class tags used across the library (documented in README).
namespace stream_class {
inline constexpr std::uint64_t kDisorder = 1;     // disorder field draws
inline constexpr std::uint64_t kChain = 2;        // MCMC sweeps
inline constexpr std::uint64_t kGaussian = 3;     // direct Gaussian field samples
inline constexpr std::uint64_t kInit = 4;         // chain initial state
}  // namespace stream_class

}  // namespace gffpin
