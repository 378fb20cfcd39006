#pragma once

#include <cstdint>
#include <stdexcept>

#include "layerq/dependence.hpp"

namespace layerq {

// Budget and seeding for a simulation run. `horizon`/`warmup` are in model
// time; `cycles` (when nonzero) additionally requires that many post-warmup
// downtime cycles of the observed machine before stopping.
struct SimConfig {
  double warmup = 0.0;
  double horizon = 0.0;
  std::uint64_t cycles = 0;
  int replications = 1;
  std::uint64_t seed = 1;
  int batches = 32;

  void check() const {
    if (!(horizon > warmup) && cycles == 0)
      throw std::invalid_argument("SimConfig: needs horizon > warmup or a cycle target");
    if (replications < 1) throw std::invalid_argument("SimConfig: replications must be >= 1");
    if (batches < 20) throw std::invalid_argument("SimConfig: batch means need >= 20 batches");
  }
};

// Point estimate with a 95% half-width and the standard error it came from.
struct Estimate {
  double value = 0.0;
  double half_width = 0.0;
  double se = 0.0;
  int replications = 1;
};

struct DowntimeStatsEstimate {
  Estimate mean;
  Estimate m2;
  Estimate cov;
  Estimate corr;
  std::uint64_t cycles = 0;

  DowntimeStats point() const {
    const double var = m2.value - mean.value * mean.value;
    return {mean.value, m2.value, cov.value + mean.value * mean.value, cov.value,
            var > 0.0 ? cov.value / var : 0.0};
  }
};

struct RelError {
  double percent;     // 100 |approx - sim| / sim
  double half_width;  // propagated from the sim half-width
};

// Relative error of an approximation against a simulation estimate, with the
// delta-method CI on the percentage.
RelError relative_error(double approx, const Estimate& sim);

}  // namespace layerq
