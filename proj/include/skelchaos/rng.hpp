#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace skelchaos {

/// Portable seeded generator. The engine is mt19937_64, whose output sequence
/// is fixed by the standard; the distributions are written out here because
/// the std:: ones are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi].
  double uniform(double lo, double hi);

  /// Standard normal via the Box-Muller transform.
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace skelchaos
