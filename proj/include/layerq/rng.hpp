#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace layerq {

// xoshiro256++ seeded through splitmix64. Hand-rolled so that seeded runs
// reproduce across standard-library implementations; std::shuffle and the
// std distributions give no such guarantee.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : state_) w = splitmix64(x);
  }

  // Independent stream `index` derived from a master seed. Child state is
  // the splitmix64 expansion of master XOR (index+1)*golden-gamma.
  static Rng stream(std::uint64_t master, std::uint64_t index) {
    return Rng(master ^ ((index + 1) * 0x9E3779B97F4A7C15ULL));
  }

  std::uint64_t next_u64() {
    std::uint64_t* s = state_;
    const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  // Uniform on (0,1): never returns 0 or 1, safe under log().
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Exponential with the given rate; rate 0 means "never" (+inf).
  double exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(uniform()) / rate;
  }

  double normal() {
    // Box-Muller, one value per call (the twin is discarded to keep the
    // stream position independent of call parity).
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Poisson count by the multiplication method, chunked so exp() never
  // underflows for large means.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
    if (mean > 1e9) throw std::invalid_argument("poisson: mean too large to sample");
    std::uint64_t total = 0;
    while (mean > 200.0) {
      total += poisson_raw(200.0);
      mean -= 200.0;
    }
    return total + poisson_raw(mean);
  }

  // Gamma with integer shape k and unit rate; divide by the rate outside.
  double erlang(int k) {
    if (k <= 256) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += -std::log(uniform());
      return acc;
    }
    return gamma_mt(static_cast<double>(k));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t poisson_raw(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t n = 0;
    double prod = uniform();
    while (prod > limit) {
      ++n;
      prod *= uniform();
    }
    return n;
  }

  // Marsaglia-Tsang for large shapes where the sum of exponentials is too slow.
  double gamma_mt(double alpha) {
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  std::uint64_t state_[4];
};

}  // namespace layerq
