#ifndef CBSLICE_RNG_HPP
#define CBSLICE_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace cbslice {

// Seeded random stream with hand-rolled transforms. The mt19937_64 engine has
// a standard-specified output sequence, but the std distributions do not, so
// every transform lives here to keep artifacts identical across toolchains.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; pairs are cached, so draws alternate
  // between consuming two engine outputs and none.
  double normal();

  double normal(double mean, double sd);

  // Uniform integer in [0, n), n > 0, by rejection from the top bits.
  std::uint64_t uniform_int(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates, back to front.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 gen_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace cbslice

#endif
