#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "layerq/config_io.hpp"
#include "layerq/repair_layer.hpp"
#include "layerq/sim.hpp"

namespace layerq {

struct ExperimentConfig {
  std::string mode;  // instance | testbed | figure3..figure7
  std::optional<LayeredSpec> layered;
  int machine = 1;
  std::optional<SimConfig> sim;  // overrides the per-mode defaults when set
  std::string out_dir = ".";
  int jobs = 1;
  int subsample = 50;
  std::uint64_t testbed_seed = 1;
  std::uint64_t seed = 20130901;
  int points = 0;             // figure sweep resolution (0 = built-in grid)
  double budget_scale = 1.0;  // multiplies simulation budgets
};

ExperimentConfig load_config(const std::string& path);

// Deterministic per-instance child seed, mirroring Rng::stream.
std::uint64_t child_seed(std::uint64_t master, std::uint64_t index);

struct InstanceResult {
  std::uint64_t seed = 0;
  double lambda1 = 0.0;
  DowntimeStats stats{};     // downtime statistics fed to the match
  double approx_mean = 0.0;  // dependence-matched approximation
  double baseline_mean = 0.0;  // independent-downtime baseline
  double approx_p0 = 0.0;      // approximation PGF at p = 0
  Estimate sim_mean;
  Estimate sim_p0;
  RelError delta{};           // approx vs simulation, percent
  RelError delta_baseline{};  // baseline vs simulation, percent
  std::vector<double> replication_means;
  std::string warning;
};

// Full pipeline on one layered instance: downtime statistics (closed form or
// simulated), moment match, exact single-server analysis, independent
// baseline and the simulation reference.
InstanceResult run_instance(const LayeredSpec& spec, int machine, const SimConfig& sim_cfg,
                            const std::optional<SimConfig>& stats_cfg = std::nullopt);

struct TestbedPoint {
  int index;
  double rho1;
  double a_sigma, a_nu;
  std::array<double, 2> b_sigma, b_nu;
  LayeredSpec spec;
};

// The 675-point grid: rho1 x (sigma1,sigma2) x (nu1,nu2) in deterministic
// order; unit-rate exponential service, lambda1 = rho1 * uptime fraction.
std::vector<TestbedPoint> testbed_grid();

// Seeded Fisher-Yates subsample of {0..total-1}, sorted ascending.
std::vector<int> subsample_indices(int total, int count, std::uint64_t seed);

struct ErrorBinReport {
  std::array<std::uint64_t, 5> bins{};  // (0,0.01], (0.01,0.1], (0.1,1], (1,5], >5 percent
  std::uint64_t ran = 0;
  std::uint64_t failed = 0;
  double mean_delta = 0.0;
  double median_delta = 0.0;
  // group label -> (mean delta, count); labels like "rho1=0.25", "a_nu=10".
  std::map<std::string, std::pair<double, std::uint64_t>> grouped;
};

struct CsvTable {
  std::string header;
  std::vector<std::string> rows;
};

ErrorBinReport run_testbed(const ExperimentConfig& cfg, CsvTable* instances_csv);

// Built-in parameter sweeps; n selects which study to reproduce (3..7).
CsvTable run_figure(int n, const ExperimentConfig& cfg);

void write_csv(const std::string& path, const CsvTable& table);
std::string csv_cells(const std::vector<double>& cells);
CsvTable report_to_csv(const ErrorBinReport& report);

}  // namespace layerq
