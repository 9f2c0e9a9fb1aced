#include "hkdelay/rng.hpp"

#include <cmath>
#include <numbers>

namespace hkdelay {

// One deviate per call; the sine branch is discarded so the sequence does not
// depend on call history.
double Rng::normal() {
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace hkdelay
