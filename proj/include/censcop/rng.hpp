#pragma once

// Reproducible random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the standard.
// The std:: distribution adaptors are implementation-defined, so every variate
// used by the library is generated here from raw 64-bit words. A replicate r of
// a study with seed s draws from stream(s, r), seeded through SplitMix64.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace censcop {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

  /// Independent child stream; children of distinct ids never share seeds.
  Rng split(std::uint64_t id) { return Rng(engine_(), id); }

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0,1) with 53 bits of resolution.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double exponential() { return -std::log(uniform()); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// log of a Gamma(shape, 1) variate (Marsaglia-Tsang; boosted for shape < 1).
  double log_gamma_variate(double shape) {
    if (shape < 1.0) {
      return log_gamma_variate(shape + 1.0) + std::log(uniform()) / shape;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d * v);
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return std::log(d * v);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace censcop
