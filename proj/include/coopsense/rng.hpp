#ifndef COOPSENSE_RNG_HPP_
#define COOPSENSE_RNG_HPP_

#include <cmath>
#include <cstdint>

namespace coopsense::rng {

/// splitmix64 finalizer. Counter-based draws keyed on (seed, stream, counter)
/// stay identical no matter how work is split across threads, which is what
/// keeps the parallel lidar kernel bit-equal to the serial one.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t counter) {
  return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

/// Uniform in (0, 1]; never returns exactly 0 so it is log-safe.
inline double uniform01(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal via Box-Muller, clamped to +/- 4 sigma.
inline double gaussian(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t counter) {
  const double u1 = uniform01(hash3(seed, stream, 2 * counter));
  const double u2 = uniform01(hash3(seed, stream, 2 * counter + 1));
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  if (z > 4.0) return 4.0;
  if (z < -4.0) return -4.0;
  return z;
}

}  // namespace coopsense::rng

#endif  // COOPSENSE_RNG_HPP_
