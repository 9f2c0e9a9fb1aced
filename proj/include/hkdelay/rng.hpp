#pragma once

#include <cstdint>
#include <random>

namespace hkdelay {

/// Seeded generator used for every randomized input.
///
/// The engine is the standard 64-bit Mersenne Twister (MT19937-64, seeded
/// with `seed(value)`). Uniform doubles take the top 53 bits of one draw:
/// u = (x >> 11) * 2^-53, so u lies in [0, 1). Normal deviates use the
/// Box-Muller transform on two consecutive uniforms. Nothing here depends on
/// the standard library's distribution classes, whose output is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace hkdelay
