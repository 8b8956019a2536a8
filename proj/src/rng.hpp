#ifndef GRADHARM_RNG_HPP
#define GRADHARM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace gradharm {

// Deterministic random source. The mt19937_64 engine sequence is fixed by the
// standard; the distributions below are implemented by hand because the
// std::*_distribution output is implementation-defined and bit-identical
// runs across toolchains are part of the artifact's contract.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of mantissa.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; caches the paired deviate.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi_u2 = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(two_pi_u2);
    has_spare_ = true;
    return r * std::cos(two_pi_u2);
  }

  // Uniform index in [0, n). n must be >= 1.
  std::size_t index_below(std::size_t n) {
    return static_cast<std::size_t>(uniform01() * static_cast<double>(n));
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}
}  // namespace detail

// Derives the seed of a named sub-stream from a root seed, so that "data",
// "init" and "batch" randomness are independent but all flow from one seed.
inline std::uint64_t substream_seed(std::uint64_t root, std::string_view name) {
  return detail::splitmix64(root ^ detail::fnv1a64(name));
}

}  // namespace gradharm

#endif
