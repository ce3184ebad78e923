#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "magnav/geometry.hpp"

namespace magnav {

/// Seeded generator with draw sequences that do not depend on the standard
/// library's distribution implementations. Every simulation stream in this
/// project goes through one of these so runs are reproducible bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1). One engine draw.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller. Exactly two engine draws per call.
  double gauss() {
    double u1 = (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;  // (0, 1)
    double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;          // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace magnav
