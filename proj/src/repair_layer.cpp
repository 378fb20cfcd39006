#include "layerq/repair_layer.hpp"

#include <cmath>

#include "layerq/numerics.hpp"
#include "layerq/sim.hpp"

namespace layerq {

namespace {

struct Rates {
  double sigma1, sigma2, nu1, nu2;
};

// Rates seen from the observed machine: machine 2 statistics follow from the
// machine-1 formulas with the indices swapped.
Rates oriented_rates(const LayeredSpec& spec, int machine) {
  const MachineParams& a = spec.machine(machine);
  const MachineParams& b = spec.machine(machine == 1 ? 2 : 1);
  const auto rate_of = [](const DistSpec& d, const char* which) {
    if (const auto* e = std::get_if<Exponential>(&d)) return e->rate;
    throw AnalyticPathUnavailable(std::string("closed-form downtime statistics need "
                                              "exponential repairs (") +
                                  which + " is not); use simulated_stats");
  };
  return {a.sigma, b.sigma, rate_of(a.repair, "this machine's repair"),
          rate_of(b.repair, "the other machine's repair")};
}

}  // namespace

const MachineParams& LayeredSpec::machine(int i) const {
  if (i == 1) return machine1;
  if (i == 2) return machine2;
  throw std::invalid_argument("LayeredSpec: machine index must be 1 or 2");
}

MachineStatePi dtmc_stationary(const LayeredSpec& spec) {
  const Rates r = oriented_rates(spec, 1);
  const double s1 = r.sigma1, s2 = r.sigma2, n1 = r.nu1, n2 = r.nu2;
  // Transition matrix over {(1,1),(1,3),(3,1),(2,3),(3,2)}.
  double P[5][5] = {};
  P[0][2] = s1 / (s1 + s2);
  P[0][1] = s2 / (s1 + s2);
  P[1][0] = n2 / (s1 + n2);
  P[1][3] = s1 / (s1 + n2);
  P[2][0] = n1 / (n1 + s2);
  P[2][4] = s2 / (n1 + s2);
  P[3][2] = 1.0;
  P[4][1] = 1.0;
  // pi (P - I) = 0 with the last balance equation replaced by normalisation.
  std::vector<std::vector<double>> a(5, std::vector<double>(5));
  std::vector<double> b(5, 0.0);
  for (int col = 0; col < 5; ++col)
    for (int row = 0; row < 5; ++row) a[col][row] = P[row][col] - (row == col ? 1.0 : 0.0);
  for (int row = 0; row < 5; ++row) a[4][row] = 1.0;
  b[4] = 1.0;
  const std::vector<double> x = solve_dense(a, b);
  MachineStatePi out{};
  for (int i = 0; i < 5; ++i) out.pi[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
  return out;
}

BreakdownProbs breakdown_probs(const LayeredSpec& spec, int machine) {
  const Rates r = oriented_rates(spec, machine);
  const double s1 = r.sigma1, s2 = r.sigma2, n1 = r.nu1, n2 = r.nu2;
  const double den = (s2 + n1) * (s1 + s2 + n2);
  return {(s1 * n1 + (s2 + n1) * n2) / den, s2 * (s1 + s2 + n1) / den};
}

RepeatProbs repeat_probs(const LayeredSpec& spec, int machine) {
  const Rates r = oriented_rates(spec, machine);
  return {r.sigma2 / (r.sigma1 + r.sigma2 + r.nu2),
          (r.sigma1 + r.sigma2) / (r.sigma1 + r.sigma2 + r.nu2)};
}

DowntimeStats downtime_stats(const LayeredSpec& spec, int machine) {
  const Rates r = oriented_rates(spec, machine);
  const double zd = breakdown_probs(spec, machine).z_down;
  // D = W + R with W zero or a residual exp(nu2) repair, independent of R.
  const double ew = zd / r.nu2;
  const double ew2 = 2.0 * zd / (r.nu2 * r.nu2);
  const double mean = ew + 1.0 / r.nu1;
  const double m2 = ew2 + 2.0 * ew / r.nu1 + 2.0 / (r.nu1 * r.nu1);
  const double cov = r.sigma1 * r.sigma2 /
                     ((r.sigma2 + r.nu1) * (r.sigma2 + r.nu1) * r.nu2 *
                      (r.sigma1 + r.sigma2 + r.nu2));
  const double var = m2 - mean * mean;
  return {mean, m2, cov + mean * mean, cov, var > 0.0 ? cov / var : 0.0};
}

DowntimeStatsEstimate simulated_stats(const LayeredSpec& spec, int machine, const SimConfig& cfg) {
  return simulate_downtimes(spec, machine, cfg);
}

DowntimeStats downtime_stats_auto(const LayeredSpec& spec, int machine,
                                  const std::optional<SimConfig>& cfg) {
  const bool exp_repairs = std::holds_alternative<Exponential>(spec.machine1.repair) &&
                           std::holds_alternative<Exponential>(spec.machine2.repair);
  if (exp_repairs) return downtime_stats(spec, machine);
  if (!cfg)
    throw AnalyticPathUnavailable(
        "non-exponential repairs: pass a SimConfig so downtime statistics can be simulated");
  DowntimeStatsEstimate est = simulated_stats(spec, machine, *cfg);
  DowntimeStats stats = est.point();
  // A true correlation of zero can come back as a small negative estimate;
  // clamp when the value is within the confidence band of zero.
  if (stats.corr < 0.0 && stats.corr > -std::max(3.0 * est.corr.se, 1e-3)) {
    stats.corr = 0.0;
    stats.cov = 0.0;
    stats.joint = stats.mean * stats.mean;
  }
  return stats;
}

MatchResult moment_match(const DowntimeStats& stats, const MatchPolicy& policy) {
  const double r = stats.corr;
  if (!(r >= 0.0 && r < 1.0))
    throw std::invalid_argument("moment_match: correlation must lie in [0,1), got " +
                                std::to_string(r));
  const double ed = stats.mean, ed2 = stats.m2;
  MatchResult out{};
  out.g1 = r;
  out.chi1 = -(1.0 - r) * ed;
  if (r == 0.0) {
    // Independent reduction: chi is the downtime itself, no freedom left.
    out.chi2 = ed2;
    out.g2 = 0.0;
    out.policy = "independent";
    return out;
  }
  const double from_g2_zero = ed2 * (1.0 - out.g1 * out.g1) + 2.0 * ed * out.chi1 * out.g1;
  if (const auto* scvp = std::get_if<MatchScvPolicy>(&policy)) {
    out.chi2 = (1.0 + scvp->scv_ref) * out.chi1 * out.chi1;
    out.policy = "repair-scv";
  } else {
    out.chi2 = std::get<MatchChi2Policy>(policy).chi2;
    out.policy = "explicit-chi2";
  }
  out.g2 = (out.chi2 - 2.0 * ed * out.chi1 * out.g1 - ed2 * (1.0 - out.g1 * out.g1)) / ed;
  if (out.g2 > 0.0) {
    out.g2 = 0.0;
    out.chi2 = from_g2_zero;
    out.fallback_g2_zero = true;
  }
  if (out.chi2 < out.chi1 * out.chi1 * (1.0 - 1e-12))
    throw std::invalid_argument("moment_match: the policy's chi''(0) implies a negative chi "
                                "variance");
  return out;
}

namespace {

VacQueueSpec assemble(const LayeredSpec& spec, int machine, const DependencePair& pair) {
  const MachineParams& m = spec.machine(machine);
  return {m.lambda, m.service, m.sigma, pair};
}

}  // namespace

VacQueueSpec approximate_queue(const LayeredSpec& spec, int machine, const DowntimeStats& stats) {
  const double scv_r = moments(spec.machine(machine).repair).scv;
  const MatchResult m = moment_match(stats, MatchScvPolicy{scv_r});
  return assemble(spec, machine, from_derivatives(m.chi1, m.chi2, m.g1, m.g2));
}

VacQueueSpec approximate_queue(const LayeredSpec& spec, int machine,
                               const std::optional<SimConfig>& cfg) {
  return approximate_queue(spec, machine, downtime_stats_auto(spec, machine, cfg));
}

VacQueueSpec independent_baseline(const LayeredSpec& spec, int machine,
                                  const DowntimeStats& stats) {
  return assemble(spec, machine, independent_pair(fit_two_moment(stats.mean, stats.m2)));
}

VacQueueSpec independent_baseline(const LayeredSpec& spec, int machine,
                                  const std::optional<SimConfig>& cfg) {
  return independent_baseline(spec, machine, downtime_stats_auto(spec, machine, cfg));
}

}  // namespace layerq
