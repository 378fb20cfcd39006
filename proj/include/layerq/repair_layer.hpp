#pragma once

#include <array>
#include <optional>
#include <variant>

#include "layerq/dependence.hpp"
#include "layerq/dist.hpp"
#include "layerq/sim_config.hpp"
#include "layerq/vacation_queue.hpp"

namespace layerq {

struct MachineParams {
  double lambda;     // product arrival rate at this machine's queue
  DistSpec service;  // product service time
  double sigma;      // breakdown rate (exponential uptimes)
  DistSpec repair;   // repair time drawn by the repairman
};

// Two machines sharing one repairman (FCFS repair buffer); each machine
// serves its own product queue with pre-emptive-repeat interruptions.
struct LayeredSpec {
  MachineParams machine1;
  MachineParams machine2;

  const MachineParams& machine(int i) const;
};

// Stationary law of the embedded machine-state chain observed at breakdown,
// repair-start and repair-end epochs. State order: (1,1), (1,3), (3,1),
// (2,3), (3,2) where 1 = up, 2 = waiting, 3 = in repair.
struct MachineStatePi {
  std::array<double, 5> pi;
};

struct BreakdownProbs {
  double z_up;    // other machine working when this one breaks
  double z_down;  // other machine in repair when this one breaks
};

struct RepeatProbs {
  double v;  // P(other machine in repair at the next breakdown | it was up)
  double w;  // same, given it was waiting at the end of our repair
};

// Exponential-repair closed forms; throw AnalyticPathUnavailable otherwise.
class AnalyticPathUnavailable : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

MachineStatePi dtmc_stationary(const LayeredSpec& spec);
BreakdownProbs breakdown_probs(const LayeredSpec& spec, int machine = 1);
RepeatProbs repeat_probs(const LayeredSpec& spec, int machine = 1);
DowntimeStats downtime_stats(const LayeredSpec& spec, int machine);

// Downtime moments and lag-1 correlation estimated from a machines-only
// simulation run; works for any repair distribution.
DowntimeStatsEstimate simulated_stats(const LayeredSpec& spec, int machine, const SimConfig& cfg);

// Closed forms when both repairs are exponential, otherwise simulation with
// the given budget (throws when no budget is supplied).
DowntimeStats downtime_stats_auto(const LayeredSpec& spec, int machine,
                                  const std::optional<SimConfig>& cfg);

// Free parameter of the moment match: either tie the SCV of the independent
// component chi to a reference SCV (by default the repair time's), or pin
// chi''(0) explicitly.
struct MatchScvPolicy {
  double scv_ref;
};
struct MatchChi2Policy {
  double chi2;
};
using MatchPolicy = std::variant<MatchScvPolicy, MatchChi2Policy>;

struct MatchResult {
  double chi1;  // chi'(0)
  double chi2;  // chi''(0)
  double g1;    // g'(0) = lag-1 correlation
  double g2;    // g''(0)
  bool fallback_g2_zero;  // policy overshot; g''(0) clamped to 0 and chi''(0) recomputed
  std::string policy;
};

// Solves the three matching equations: g'(0) = corr, chi'(0) =
// -(1-corr) E[D], the free chi''(0) from the policy and g''(0) from the
// second-moment equation; falls back to g''(0) = 0 when the policy would
// make the increment variance negative. Rejects corr outside [0, 1).
MatchResult moment_match(const DowntimeStats& stats, const MatchPolicy& policy);

// Single-server vacation-queue instance whose downtime pair matches the
// layered model's (E[D], E[D^2], lag-1 correlation) for the given machine.
VacQueueSpec approximate_queue(const LayeredSpec& spec, int machine, const DowntimeStats& stats);
VacQueueSpec approximate_queue(const LayeredSpec& spec, int machine,
                               const std::optional<SimConfig>& cfg = std::nullopt);

// Same marginal downtime moments with the dependence ignored (independent
// two-moment-fitted downtimes).
VacQueueSpec independent_baseline(const LayeredSpec& spec, int machine,
                                  const DowntimeStats& stats);
VacQueueSpec independent_baseline(const LayeredSpec& spec, int machine,
                                  const std::optional<SimConfig>& cfg = std::nullopt);

}  // namespace layerq
