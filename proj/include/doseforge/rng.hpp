#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "doseforge/math.hpp"

namespace doseforge {

// splitmix64 finalizer; used both as a bit mixer and to derive stream seeds
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// deterministic sub-stream seed: hash the root seed with a stream tag
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(mix64(seed) ^ mix64(tag + 0x517cc1b727220a95ULL));
}
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag1, std::uint64_t tag2) {
  return derive_seed(derive_seed(seed, tag1), tag2);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic draws on top of mt19937_64. The standard pins the engine's
// output sequence but not the library distributions, so the transforms to
// uniform / normal / exponential / gamma live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform on the open interval (0,1)
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // uniform kept away from both endpoints by eps; inverse-CDF inputs
  double uniform_clamped(double eps = 0x1.0p-43) {
    double u = uniform();
    if (u < eps) return eps;
    if (u > 1.0 - eps) return 1.0 - eps;
    return u;
  }

  double normal() { return normal_quantile(uniform()); }

  double exponential() { return -std::log(uniform()); }

  // Marsaglia-Tsang; shape > 0, unit scale
  double gamma(double shape) {
    if (shape < 1.0) {
      double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  std::uint64_t bits() { return eng_(); }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // rejection to avoid modulo bias
    std::uint64_t lim = std::numeric_limits<std::uint64_t>::max() / n * n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= lim);
    return x % n;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace doseforge
