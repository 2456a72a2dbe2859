#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace errw {

// Counter-based generator (splitmix64 finalizer over an incrementing counter).
// Draw k of stream (seed, stream) is a pure hash of (seed, stream, k), so
// parallel chains get independent streams without coordination and any run
// is reproducible from the 64-bit seed alone.
class Rng {
public:
  explicit Rng(uint64_t seed, uint64_t stream = 0)
      : key_(mix(mix(seed + 0x9E3779B97F4A7C15ULL) ^
                 mix(stream * 0xD1B54A32D192ED03ULL + 0x2545F4914F6CDD1DULL))),
        ctr_(0) {}

  uint64_t next_u64() {
    ctr_ += 0x9E3779B97F4A7C15ULL;
    return mix(key_ ^ ctr_);
  }

  // uniform on [0,1), 53 random mantissa bits
  double uniform() { return (double)(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0,1], safe for logs
  double uniform_pos() { return (double)((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double normal() {
    // Box-Muller, no cached spare: keeps draws a pure function of the counter
    double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    return r * std::cos(6.283185307179586 * uniform());
  }

  double exponential(double rate) {
    if (!(rate > 0)) throw std::invalid_argument("exponential: rate must be > 0");
    return -std::log(uniform_pos()) / rate;
  }

  // Marsaglia-Tsang squeeze for shape >= 1, with the power boost below 1;
  // valid for every shape > 0 (reinforced walks need shapes well under 1).
  double gamma(double shape) {
    if (!(shape > 0)) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
      double g = gamma(shape + 1.0);
      double u = uniform_pos();
      double v = g * std::pow(u, 1.0 / shape);
      return v > 0 ? v : std::numeric_limits<double>::min();
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0) continue;
      double v = t * t * t;
      double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // index sampled proportionally to nonnegative weights w[0..n)
  int categorical(const double* w, int n) {
    double total = 0;
    for (int i = 0; i < n; ++i) total += w[i];
    if (!(total > 0)) throw std::invalid_argument("categorical: weights must have positive sum");
    double r = uniform() * total;
    for (int i = 0; i < n; ++i) {
      r -= w[i];
      if (r < 0) return i;
    }
    return n - 1;
  }

private:
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  uint64_t key_;
  uint64_t ctr_;
};

}  // namespace errw
