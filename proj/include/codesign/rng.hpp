#pragma once

// Deterministic, addressable random streams. Every stochastic consumer owns a
// substream derived from a master seed plus a key path (run index, region
// index, particle index, ...), so results never depend on thread scheduling
// or on how work is partitioned across workers.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace codesign {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  // Independent substream addressed by this stream's seed and a key path.
  Rng derive(std::initializer_list<std::uint64_t> keys) const {
    std::uint64_t h = seed_;
    for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k));
    return Rng(h);
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Modulo bias is below 2^-40 for n < 2^24.
  int uniform_int(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

  // Standard normal via Box-Muller; the second value of each pair is cached,
  // so the draw sequence of a stream is fixed by its seed alone.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace codesign
