#pragma once

#include <cstdint>
#include <random>

namespace lieode {

// mt19937_64 with a 53-bit mantissa ladder; both are fully specified, so a
// seed produces the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace lieode
