#pragma once

#include <cstdint>

namespace ctmix {

// SplitMix64. Chosen over std::mt19937_64 because the project promises
// byte-identical artifacts across platforms, and the standard distributions
// are not bit-stable across library implementations. The generator and the
// uniform/int mappings below are fully pinned down here.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1): top 53 bits scaled by 2^-53.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n) via Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t x = next();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t threshold = (0ull - n) % n;
      while (lo < threshold) {
        x = next();
        m = static_cast<unsigned __int128>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Derive an independent stream deterministically (e.g. one per chain in a
  // batch) without consuming state from this generator.
  static Rng stream(std::uint64_t seed, std::uint64_t idx) {
    Rng mix(seed ^ (0x632be59bd9b4e019ull * (idx + 1)));
    mix.next();
    return Rng(mix.next());
  }

private:
  std::uint64_t state_;
};

} // namespace ctmix
