#include "cbslice/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cbslice {

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // u1 must be strictly positive for the log.
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

double Rng::normal(double mean, double sd) {
  return mean + sd * normal();
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0)
    throw std::invalid_argument("Rng::uniform_int: n must be positive");
  // Reject values in the incomplete tail so every residue is equally likely.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = 0;
  do {
    x = gen_();
  } while (x >= limit);
  return x % n;
}

}  // namespace cbslice
