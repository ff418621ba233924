#pragma once

#include <cstdint>
#include <random>

namespace dualgeo {

/// Seeded generator whose draws depend only on the seed, not on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t bits() { return engine_(); }

  /// Independent stream for task `index`, so parallel work does not depend
  /// on scheduling order.
  Rng fork(std::uint64_t index) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_ & 0xffffffffu),
                      static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(index & 0xffffffffu),
                      static_cast<std::uint32_t>(index >> 32)};
    std::uint64_t s = 0;
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    s = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    return Rng(s);
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace dualgeo
