#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace levy {

using Seed = std::uint64_t;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Seed for a named stage of a run: splitmix64(seed XOR fnv1a(stage)).
/// Every random stage of a pipeline draws from its own derived stream so that
/// adding or reordering stages never perturbs the others.
inline Seed derive_seed(Seed seed, std::string_view stage) noexcept {
  return detail::splitmix64(seed ^ detail::fnv1a(stage));
}

inline Seed derive_seed(Seed seed, std::uint64_t index) noexcept {
  return detail::splitmix64(seed ^ detail::splitmix64(index + 0x632be59bd9b4e019ULL));
}

// Variates are built from raw 64-bit words instead of <random> distributions,
// whose algorithms are implementation-defined; output is then identical on
// every standard library.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double exponential() { return -std::log(uniform()); }

  /// Standard normal by the Box-Muller transform (one value per call).
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    return r * std::cos(2.0 * 3.14159265358979323846 * uniform());
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace levy
