#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace mmshare {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace detail

// Single randomness stream. All distribution transforms are implemented
// here (not via std:: distributions) so that sequences are identical for a
// given seed on every build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    // modulo bias is < 2^-40 for the n used here (cell sizes, resamples)
    return engine_() % n;
  }

  // Unit-mean exponential (Rayleigh power fading).
  double exponential() { return -std::log(1.0 - uniform()); }

  // Standard normal via Box-Muller; one fresh pair of uniforms per call.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Poisson count by inversion; chunked so the product never underflows.
  std::uint64_t poisson(double mean) {
    if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
    std::uint64_t total = 0;
    while (mean > 500.0) {
      total += poisson_knuth(500.0);
      mean -= 500.0;
    }
    return total + poisson_knuth(mean);
  }

 private:
  std::uint64_t poisson_knuth(double mean) {
    if (mean == 0.0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::mt19937_64 engine_;
};

// Derives named, independent substreams from one master seed, so that any
// Monte Carlo drop can be reproduced in isolation.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t master_seed) : master_(master_seed) {}

  Rng stream(std::string_view name, std::uint64_t index = 0) const {
    std::uint64_t s = master_ ^ detail::fnv1a(name);
    std::uint64_t mixed = detail::splitmix64(s);
    s ^= (index + 1) * 0x9e3779b97f4a7c15ull;
    mixed ^= detail::splitmix64(s);
    return Rng(mixed);
  }

  std::uint64_t master_seed() const { return master_; }

 private:
  std::uint64_t master_;
};

}  // namespace mmshare
