#include "skelchaos/rng.hpp"

#include <cmath>
#include <numbers>

namespace skelchaos {

double Rng::uniform(double lo, double hi) {
  const double value = lo + (hi - lo) * uniform01();
  return value > hi ? hi : value;
}

double Rng::normal() {
  if (spare_) {
    const double value = *spare_;
    spare_.reset();
    return value;
  }
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

}  // namespace skelchaos
