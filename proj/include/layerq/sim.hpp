#pragma once

#include <array>
#include <string>
#include <vector>

#include "layerq/repair_layer.hpp"
#include "layerq/sim_config.hpp"
#include "layerq/vacation_queue.hpp"

namespace layerq {

struct QueueEstimates {
  Estimate mean;            // time-average queue length
  std::vector<double> pmf;  // time-average occupancy of {0,1,...}
  Estimate p0;              // time-average P(L = 0)
  Estimate sojourn;         // mean time in system of departed products
  std::uint64_t departures = 0;
};

struct MachineEstimates {
  DowntimeStatsEstimate downtime;
  Estimate p_up;
};

struct LayeredSimResult {
  std::array<QueueEstimates, 2> queues;
  std::array<MachineEstimates, 2> machines;
  double observed_time = 0.0;  // post-warmup time per replication (summed)
  std::uint64_t seed = 0;
  std::vector<double> replication_means_q1;
  std::string warning;  // set when an unstable spec was truncated
};

struct VacSimResult {
  QueueEstimates queue;
  MachineEstimates server;
  std::vector<double> uptime_start_pmf;  // queue length at uptime starts (N epochs)
  std::vector<double> uptime_end_pmf;    // queue length at uptime ends (M epochs)
  double observed_time = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> replication_means;
  std::string warning;
};

// Event-driven simulation of the two-machine/one-repairman network with
// product queues: Poisson arrivals, pre-emptive repeat (fresh service sample
// after an interruption), FCFS repair buffer. Simultaneous events resolve
// breakdown first, then repair completion, service completion, arrival.
LayeredSimResult simulate_layered(const LayeredSpec& spec, const SimConfig& cfg);

// Machines-only run (no products) collecting downtime statistics of the
// given machine; stops at cfg.cycles post-warmup downtimes.
DowntimeStatsEstimate simulate_downtimes(const LayeredSpec& spec, int machine,
                                         const SimConfig& cfg);

// Single-server vacation queue with one-dependent downtimes sampled through
// the pair's increment recipe (Zero, Linear or CompoundPoisson g only).
VacSimResult simulate_vacq(const VacQueueSpec& spec, const SimConfig& cfg);

}  // namespace layerq
