#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "kmf/types.hpp"

namespace kmf {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Deterministic random stream with value semantics. Copies replay the same
/// sequence, which is how the sensor nodes share one seeded generator: each
/// node holds a copy and issues the identical sequence of draws.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed)
      : seed_(seed), engine_(detail::splitmix64(seed)) {}

  /// Independent stream derived from this stream's seed and an id.
  RandomStream child(std::uint64_t id) const {
    return RandomStream(detail::splitmix64(seed_ ^ detail::splitmix64(id + 1)));
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the second value of each pair is cached.
  double gauss() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Vec gauss_vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss();
    return v;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace kmf
