#include "layerq/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <thread>

#include "layerq/numerics.hpp"

namespace layerq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kPmfCap = 4096;

Estimate estimate_from(const std::vector<double>& values) {
  Estimate e;
  const int n = static_cast<int>(values.size());
  e.replications = n;
  if (n == 0) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  e.value = sum / n;
  if (n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.value) * (v - e.value);
    e.se = std::sqrt(ss / (n - 1.0) / n);
    e.half_width = student_t_975(n - 1) * e.se;
  }
  return e;
}

// Time- or count-weighted per-batch accumulator; batch means feed the CI.
struct BatchSeries {
  std::vector<double> num, den;
  explicit BatchSeries(int nb) : num(static_cast<std::size_t>(nb), 0.0),
                                 den(static_cast<std::size_t>(nb), 0.0) {}
  void add(int b, double x, double w = 1.0) {
    num[static_cast<std::size_t>(b)] += x;
    den[static_cast<std::size_t>(b)] += w;
  }
  std::vector<double> means() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < num.size(); ++i)
      if (den[i] > 0.0) out.push_back(num[i] / den[i]);
    return out;
  }
};

// Running downtime-sequence statistics with lag-1 products, batched by cycle
// index against a known target so the confidence intervals use batch means.
struct DowntimeAcc {
  std::uint64_t n = 0;
  double sum = 0.0, sum2 = 0.0, sum_lag = 0.0;
  std::uint64_t pairs = 0;
  double prev = 0.0;
  bool have_prev = false;

  int nb;
  std::uint64_t per_batch;
  std::vector<double> b_sum, b_sum2, b_lag;
  std::vector<std::uint64_t> b_n, b_pairs;

  DowntimeAcc(int batches, std::uint64_t expected)
      : nb(batches),
        per_batch(std::max<std::uint64_t>(1, expected / static_cast<std::uint64_t>(batches))),
        b_sum(static_cast<std::size_t>(batches), 0.0),
        b_sum2(static_cast<std::size_t>(batches), 0.0),
        b_lag(static_cast<std::size_t>(batches), 0.0),
        b_n(static_cast<std::size_t>(batches), 0),
        b_pairs(static_cast<std::size_t>(batches), 0) {}

  void record(double d) {
    const std::size_t b =
        std::min<std::size_t>(static_cast<std::size_t>(n / per_batch),
                              static_cast<std::size_t>(nb - 1));
    ++n;
    sum += d;
    sum2 += d * d;
    b_sum[b] += d;
    b_sum2[b] += d * d;
    ++b_n[b];
    if (have_prev) {
      sum_lag += prev * d;
      ++pairs;
      b_lag[b] += prev * d;
      ++b_pairs[b];
    }
    prev = d;
    have_prev = true;
  }
};

DowntimeStatsEstimate finalize_downtimes(const std::vector<DowntimeAcc>& reps) {
  DowntimeStatsEstimate out;
  std::vector<double> means, m2s, covs, corrs;
  double sum = 0.0, sum2 = 0.0, lag = 0.0;
  std::uint64_t n = 0, pairs = 0;
  for (const auto& a : reps) {
    n += a.n;
    pairs += a.pairs;
    sum += a.sum;
    sum2 += a.sum2;
    lag += a.sum_lag;
    for (int b = 0; b < a.nb; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      if (a.b_n[bi] < 16 || a.b_pairs[bi] < 16) continue;
      const double mb = a.b_sum[bi] / static_cast<double>(a.b_n[bi]);
      const double m2b = a.b_sum2[bi] / static_cast<double>(a.b_n[bi]);
      const double jb = a.b_lag[bi] / static_cast<double>(a.b_pairs[bi]);
      means.push_back(mb);
      m2s.push_back(m2b);
      covs.push_back(jb - mb * mb);
      const double vb = m2b - mb * mb;
      if (vb > 0.0) corrs.push_back((jb - mb * mb) / vb);
    }
  }
  out.cycles = n;
  if (n == 0) return out;
  const double mean = sum / static_cast<double>(n);
  const double m2 = sum2 / static_cast<double>(n);
  const double joint = pairs > 0 ? lag / static_cast<double>(pairs) : mean * mean;
  const double var = m2 - mean * mean;
  out.mean = estimate_from(means);
  out.m2 = estimate_from(m2s);
  out.cov = estimate_from(covs);
  out.corr = estimate_from(corrs);
  // Point values from the full sequence; the batch spread only sets the SEs.
  out.mean.value = mean;
  out.m2.value = m2;
  out.cov.value = joint - mean * mean;
  out.corr.value = var > 0.0 ? (joint - mean * mean) / var : 0.0;
  return out;
}

std::vector<double> normalized(const std::vector<std::uint64_t>& counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  std::vector<double> out(counts.size(), 0.0);
  if (total == 0.0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i)
    out[i] = static_cast<double>(counts[i]) / total;
  return out;
}

// Per-replication raw sums shared by both engines.
struct QueueAcc {
  std::vector<double> area;  // time integral per occupancy level
  double area_total = 0.0;   // time integral of L
  double time = 0.0;
  BatchSeries mean_b, p0_b;
  double sojourn_sum = 0.0;
  std::uint64_t departures = 0;
  BatchSeries soj_b;

  explicit QueueAcc(int nb) : mean_b(nb), p0_b(nb), soj_b(nb) {}

  void account(int batch, std::uint64_t q, double dt) {
    const std::size_t idx = std::min<std::size_t>(q, kPmfCap - 1);
    if (area.size() <= idx) area.resize(idx + 1, 0.0);
    area[idx] += dt;
    area_total += static_cast<double>(q) * dt;
    time += dt;
    mean_b.add(batch, static_cast<double>(q) * dt, dt);
    p0_b.add(batch, q == 0 ? dt : 0.0, dt);
  }
};

void merge_pmf(std::vector<double>& total, const std::vector<double>& area) {
  if (total.size() < area.size()) total.resize(area.size(), 0.0);
  for (std::size_t i = 0; i < area.size(); ++i) total[i] += area[i];
}

QueueEstimates finalize_queue(const std::vector<QueueAcc>& reps) {
  QueueEstimates out;
  std::vector<double> means, p0s, sojs;
  std::vector<double> pmf_area;
  double time = 0.0, area_total = 0.0, soj_sum = 0.0;
  std::uint64_t deps = 0;
  for (const auto& a : reps) {
    for (double m : a.mean_b.means()) means.push_back(m);
    for (double m : a.p0_b.means()) p0s.push_back(m);
    for (double m : a.soj_b.means()) sojs.push_back(m);
    merge_pmf(pmf_area, a.area);
    time += a.time;
    area_total += a.area_total;
    soj_sum += a.sojourn_sum;
    deps += a.departures;
  }
  out.mean = estimate_from(means);
  out.p0 = estimate_from(p0s);
  out.sojourn = estimate_from(sojs);
  if (time > 0.0) {
    out.mean.value = area_total / time;
    out.pmf = pmf_area;
    for (double& v : out.pmf) v /= time;
    out.p0.value = out.pmf.empty() ? 0.0 : out.pmf[0];
  }
  if (deps > 0) out.sojourn.value = soj_sum / static_cast<double>(deps);
  out.departures = deps;
  return out;
}

// ---------------------------------------------------------------------------
// Layered-model engine (one replication).
// ---------------------------------------------------------------------------

struct LayeredRep {
  std::array<QueueAcc, 2> queues;
  std::array<DowntimeAcc, 2> downtimes;
  std::array<BatchSeries, 2> up_b;
  std::array<double, 2> up_time{0.0, 0.0};
  double observed = 0.0;
  double final_q1 = 0.0;
  double mean_q1 = 0.0;
};

LayeredRep run_layered_rep(const LayeredSpec& spec, const SimConfig& cfg, int rep_index,
                           int stat_machine) {
  Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(rep_index));
  const int nb = cfg.batches;
  const std::uint64_t cycle_target = cfg.cycles;
  LayeredRep acc{{QueueAcc(nb), QueueAcc(nb)},
                 {DowntimeAcc(nb, cycle_target ? cycle_target : 1), DowntimeAcc(nb, cycle_target ? cycle_target : 1)},
                 {BatchSeries(nb), BatchSeries(nb)},
                 {0.0, 0.0},
                 0.0,
                 0.0,
                 0.0};

  const MachineParams* mp[2] = {&spec.machine1, &spec.machine2};
  double t = 0.0;
  bool up[2] = {true, true};
  double next_break[2], next_arr[2], next_svc[2] = {kInf, kInf};
  double down_start[2] = {0.0, 0.0};
  double repair_end = kInf;
  int repairing = -1;
  int buffer = -1;  // at most one machine can wait with two machines
  std::uint64_t q[2] = {0, 0};
  std::deque<double> stamps[2];
  std::uint64_t cycles_done = 0;

  for (int i = 0; i < 2; ++i) {
    next_break[i] = rng.exponential(mp[i]->sigma);
    next_arr[i] = mp[i]->lambda > 0.0 ? rng.exponential(mp[i]->lambda) : kInf;
  }

  const bool time_mode = cfg.horizon > 0.0;
  const double horizon = time_mode ? cfg.horizon : kInf;
  const double slice = time_mode && cfg.horizon > cfg.warmup
                           ? (cfg.horizon - cfg.warmup) / nb
                           : kInf;

  const auto start_repair = [&](int i) {
    repairing = i;
    repair_end = t + sample(mp[i]->repair, rng);
  };

  while (true) {
    // Event selection; the scan order is the tie-break priority.
    double tn = next_break[0];
    int ev = 0;
    if (next_break[1] < tn) { tn = next_break[1]; ev = 1; }
    if (repair_end < tn) { tn = repair_end; ev = 2; }
    if (next_svc[0] < tn) { tn = next_svc[0]; ev = 3; }
    if (next_svc[1] < tn) { tn = next_svc[1]; ev = 4; }
    if (next_arr[0] < tn) { tn = next_arr[0]; ev = 5; }
    if (next_arr[1] < tn) { tn = next_arr[1]; ev = 6; }

    bool stop = false;
    double t_ev = tn;
    if (t_ev >= horizon) {
      t_ev = horizon;
      stop = true;
    }
    if (!time_mode && cycle_target > 0 && cycles_done >= cycle_target) stop = true;

    // Advance the clock, accumulating post-warmup areas.
    if (t_ev > t) {
      double lo = std::max(t, cfg.warmup);
      if (t_ev > lo) {
        const double dt = t_ev - lo;
        const int batch =
            time_mode
                ? std::min(nb - 1, static_cast<int>((lo - cfg.warmup) / slice))
                : std::min(nb - 1,
                           static_cast<int>(
                               cycles_done /
                               acc.downtimes[static_cast<std::size_t>(stat_machine - 1)].per_batch));
        for (int i = 0; i < 2; ++i) {
          acc.queues[static_cast<std::size_t>(i)].account(batch, q[i], dt);
          acc.up_b[static_cast<std::size_t>(i)].add(batch, up[i] ? dt : 0.0, dt);
          if (up[i]) acc.up_time[static_cast<std::size_t>(i)] += dt;
        }
        acc.observed += dt;
      }
      t = t_ev;
    }
    if (stop) break;

    switch (ev) {
      case 0:
      case 1: {  // breakdown; discards any service in progress
        const int i = ev;
        up[i] = false;
        next_svc[i] = kInf;
        next_break[i] = kInf;
        down_start[i] = t;
        if (repairing < 0) start_repair(i);
        else buffer = i;
        break;
      }
      case 2: {  // repair completion
        const int i = repairing;
        repairing = -1;
        up[i] = true;
        const double d = t - down_start[i];
        if (t >= cfg.warmup) {
          acc.downtimes[static_cast<std::size_t>(i)].record(d);
          if (i == stat_machine - 1) ++cycles_done;
        }
        next_break[i] = t + rng.exponential(mp[i]->sigma);
        if (q[i] > 0) next_svc[i] = t + sample(mp[i]->service, rng);
        if (buffer >= 0) {
          const int j = buffer;
          buffer = -1;
          start_repair(j);
        }
        break;
      }
      case 3:
      case 4: {  // service completion
        const int i = ev - 3;
        --q[i];
        if (!stamps[i].empty()) {
          const double sj = t - stamps[i].front();
          stamps[i].pop_front();
          if (t >= cfg.warmup) {
            acc.queues[static_cast<std::size_t>(i)].sojourn_sum += sj;
            ++acc.queues[static_cast<std::size_t>(i)].departures;
            const int batch = time_mode
                                  ? std::min(nb - 1, static_cast<int>((t - cfg.warmup) / slice))
                                  : 0;
            acc.queues[static_cast<std::size_t>(i)].soj_b.add(batch, sj, 1.0);
          }
        }
        next_svc[i] = q[i] > 0 ? t + sample(mp[i]->service, rng) : kInf;
        break;
      }
      default: {  // arrival
        const int i = ev - 5;
        ++q[i];
        stamps[i].push_back(t);
        next_arr[i] = t + rng.exponential(mp[i]->lambda);
        if (up[i] && next_svc[i] == kInf) next_svc[i] = t + sample(mp[i]->service, rng);
        break;
      }
    }
  }
  acc.final_q1 = static_cast<double>(q[0]);
  acc.mean_q1 = acc.queues[0].time > 0.0 ? acc.queues[0].area_total / acc.queues[0].time : 0.0;
  return acc;
}

template <class Fn>
void run_replications(int count, Fn&& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (int r = 0; r < count; ++r) body(r);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int wkr = 0; wkr < workers; ++wkr)
    pool.emplace_back([&] {
      for (int r = next.fetch_add(1); r < count; r = next.fetch_add(1)) body(r);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

LayeredSimResult simulate_layered(const LayeredSpec& spec, const SimConfig& cfg) {
  cfg.check();
  // Replications use independent streams and land in per-index slots, so the
  // aggregate is identical however many workers ran.
  std::vector<LayeredRep> slots(static_cast<std::size_t>(cfg.replications),
                                LayeredRep{{QueueAcc(cfg.batches), QueueAcc(cfg.batches)},
                                           {DowntimeAcc(cfg.batches, 1), DowntimeAcc(cfg.batches, 1)},
                                           {BatchSeries(cfg.batches), BatchSeries(cfg.batches)},
                                           {0.0, 0.0},
                                           0.0,
                                           0.0,
                                           0.0});
  run_replications(cfg.replications,
                   [&](int r) { slots[static_cast<std::size_t>(r)] = run_layered_rep(spec, cfg, r, 1); });

  LayeredSimResult out;
  out.seed = cfg.seed;
  for (int qi = 0; qi < 2; ++qi) {
    std::vector<QueueAcc> qa;
    for (auto& rep : slots) qa.push_back(rep.queues[static_cast<std::size_t>(qi)]);
    out.queues[static_cast<std::size_t>(qi)] = finalize_queue(qa);
  }
  for (int mi = 0; mi < 2; ++mi) {
    std::vector<DowntimeAcc> da;
    std::vector<double> ups;
    for (auto& rep : slots) {
      da.push_back(rep.downtimes[static_cast<std::size_t>(mi)]);
      for (double v : rep.up_b[static_cast<std::size_t>(mi)].means()) ups.push_back(v);
    }
    out.machines[static_cast<std::size_t>(mi)].downtime = finalize_downtimes(da);
    out.machines[static_cast<std::size_t>(mi)].p_up = estimate_from(ups);
  }
  for (auto& rep : slots) {
    out.observed_time += rep.observed;
    out.replication_means_q1.push_back(rep.mean_q1);
  }
  // Drift diagnostic for specs run past their stability boundary.
  const auto drifted = [&](int qi) {
    const auto& mean = out.queues[static_cast<std::size_t>(qi)].mean;
    double final_sum = 0.0;
    for (auto& rep : slots) final_sum += qi == 0 ? rep.final_q1 : 0.0;
    return qi == 0 && !slots.empty() &&
           final_sum / static_cast<double>(slots.size()) > 4.0 * (mean.value + 10.0);
  };
  if (drifted(0))
    out.warning = "queue 1 drifted upward over the run; spec is likely unstable and the "
                  "estimates are truncation-biased";
  return out;
}

DowntimeStatsEstimate simulate_downtimes(const LayeredSpec& spec, int machine,
                                         const SimConfig& cfg) {
  if (machine != 1 && machine != 2)
    throw std::invalid_argument("simulate_downtimes: machine index must be 1 or 2");
  cfg.check();
  LayeredSpec quiet = spec;  // machines only: no product traffic
  quiet.machine1.lambda = 0.0;
  quiet.machine2.lambda = 0.0;
  std::vector<DowntimeAcc> slots;
  for (int r = 0; r < cfg.replications; ++r)
    slots.push_back(DowntimeAcc(cfg.batches, std::max<std::uint64_t>(cfg.cycles, 1)));
  run_replications(cfg.replications, [&](int r) {
    LayeredRep rep = run_layered_rep(quiet, cfg, r, machine);
    slots[static_cast<std::size_t>(r)] = rep.downtimes[static_cast<std::size_t>(machine - 1)];
  });
  return finalize_downtimes(slots);
}

VacSimResult simulate_vacq(const VacQueueSpec& spec, const SimConfig& cfg) {
  cfg.check();
  if (!samplable(spec.pair.g))
    throw std::invalid_argument(
        "simulate_vacq: the pair's g tag (log-lst) has no increment sampler");
  if (!(cfg.horizon > cfg.warmup))
    throw std::invalid_argument("simulate_vacq: needs a time horizon");

  struct VacRep {
    QueueAcc queue;
    DowntimeAcc down;
    BatchSeries up_b;
    std::vector<std::uint64_t> n_counts, m_counts;
    double observed = 0.0;
    double mean = 0.0;
    double final_q = 0.0;
    explicit VacRep(int nb) : queue(nb), down(nb, 1), up_b(nb) {}
  };

  const double mean_d = stationary_moments(spec.pair).first;
  const int nb = cfg.batches;
  std::vector<VacRep> slots;
  for (int r = 0; r < cfg.replications; ++r) slots.emplace_back(nb);

  run_replications(cfg.replications, [&](int r) {
    VacRep& acc = slots[static_cast<std::size_t>(r)];
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(r));
    double t = 0.0;
    bool up = true;
    std::uint64_t q = 0;
    double next_arr = rng.exponential(spec.lambda);
    double next_svc = kInf;
    double next_change = rng.exponential(spec.sigma);
    double prev_d = mean_d;  // seeds the first increment near steady state
    const double slice = (cfg.horizon - cfg.warmup) / nb;
    const auto epoch_count = [&](std::vector<std::uint64_t>& v) {
      if (t < cfg.warmup) return;
      if (v.size() <= q) v.resize(q + 1, 0);
      ++v[q];
    };

    while (true) {
      double tn = next_change;
      int ev = 0;
      if (next_svc < tn) { tn = next_svc; ev = 1; }
      if (next_arr < tn) { tn = next_arr; ev = 2; }
      bool stop = false;
      double t_ev = tn;
      if (t_ev >= cfg.horizon) {
        t_ev = cfg.horizon;
        stop = true;
      }
      if (t_ev > t) {
        double lo = std::max(t, cfg.warmup);
        if (t_ev > lo) {
          const double dt = t_ev - lo;
          const int batch = std::min(nb - 1, static_cast<int>((lo - cfg.warmup) / slice));
          acc.queue.account(batch, q, dt);
          acc.up_b.add(batch, up ? dt : 0.0, dt);
          acc.observed += dt;
        }
        t = t_ev;
      }
      if (stop) break;

      if (ev == 0) {
        if (up) {  // breakdown: vacation starts, work in progress is lost
          epoch_count(acc.m_counts);
          up = false;
          next_svc = kInf;
          const double d = sample_next_downtime(spec.pair, prev_d, rng);
          prev_d = d;
          if (t >= cfg.warmup) acc.down.record(d);
          next_change = t + d;
        } else {  // vacation ends
          epoch_count(acc.n_counts);
          up = true;
          next_change = t + rng.exponential(spec.sigma);
          if (q > 0) next_svc = t + sample(spec.service, rng);
        }
      } else if (ev == 1) {
        --q;
        ++acc.queue.departures;
        next_svc = q > 0 ? t + sample(spec.service, rng) : kInf;
      } else {
        ++q;
        next_arr = t + rng.exponential(spec.lambda);
        if (up && next_svc == kInf) next_svc = t + sample(spec.service, rng);
      }
    }
    acc.final_q = static_cast<double>(q);
    acc.mean = acc.queue.time > 0.0 ? acc.queue.area_total / acc.queue.time : 0.0;
  });

  VacSimResult out;
  out.seed = cfg.seed;
  std::vector<QueueAcc> qa;
  std::vector<DowntimeAcc> da;
  std::vector<double> ups;
  std::vector<std::uint64_t> ncounts, mcounts;
  for (auto& rep : slots) {
    qa.push_back(rep.queue);
    da.push_back(rep.down);
    for (double v : rep.up_b.means()) ups.push_back(v);
    if (ncounts.size() < rep.n_counts.size()) ncounts.resize(rep.n_counts.size(), 0);
    for (std::size_t i = 0; i < rep.n_counts.size(); ++i) ncounts[i] += rep.n_counts[i];
    if (mcounts.size() < rep.m_counts.size()) mcounts.resize(rep.m_counts.size(), 0);
    for (std::size_t i = 0; i < rep.m_counts.size(); ++i) mcounts[i] += rep.m_counts[i];
    out.observed_time += rep.observed;
    out.replication_means.push_back(rep.mean);
  }
  out.queue = finalize_queue(qa);
  out.server.downtime = finalize_downtimes(da);
  out.server.p_up = estimate_from(ups);
  out.uptime_start_pmf = normalized(ncounts);
  out.uptime_end_pmf = normalized(mcounts);
  if (!stability(spec).stable)
    out.warning = "spec is unstable; estimates are horizon-truncated";
  return out;
}

RelError relative_error(double approx, const Estimate& sim) {
  if (!(sim.value > 0.0))
    throw std::invalid_argument("relative_error: simulation value must be positive");
  const double pct = 100.0 * std::abs(approx - sim.value) / sim.value;
  const double half = 100.0 * std::abs(approx) * sim.half_width / (sim.value * sim.value);
  return {pct, half};
}

}  // namespace layerq
