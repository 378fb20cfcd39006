#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "layerq/dependence.hpp"
#include "layerq/dist.hpp"

namespace layerq {

// M/G/1 queue with Poisson(lambda) arrivals, service B, exponential(sigma)
// uptimes, pre-emptive-repeat interruptions and one-dependent downtimes
// described by `pair`.
struct VacQueueSpec {
  double lambda;
  DistSpec service;
  double sigma;
  DependencePair pair;
};

struct StabilityReport {
  double rho;    // lambda * E[B]
  double bound;  // E[U] / (E[U] + E[D])
  bool stable;
  std::string text() const;
};

StabilityReport stability(const VacQueueSpec& spec);

class UnstableSpec : public std::runtime_error {
 public:
  explicit UnstableSpec(const StabilityReport& rep)
      : std::runtime_error("unstable spec: " + rep.text()), report(rep) {}
  StabilityReport report;
};

// Raised when two independent derivative routes disagree or a root bracket
// fails; indicates a kernel defect rather than a bad input.
class KernelDiagnostic : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Immutable queue-length analysis: builds the busy-period root, the
// transient kernel, the boundary constants and the mean once; evaluation
// methods are const and thread-safe.
class VacationQueueAnalysis {
 public:
  explicit VacationQueueAnalysis(VacQueueSpec spec, double product_tol = 1e-12);

  const VacQueueSpec& spec() const { return spec_; }

  double busy_root() const { return mu_; }       // mu(sigma), in (0,1)
  double lim_a_plus_k() const { return limAK_; }  // lim_{p->mu} [A(p)+K(p)]
  double phi() const { return phi_; }             // root of 1-E(p) in (0,mu)
  double ex_mu_pow_n() const { return x_; }       // E[mu^N]
  double ex_n_mu_pow_n() const { return y_; }     // E[N mu^N]
  double mean_downtime() const { return ed_; }
  double p_up() const { return p_up_; }
  double p_down() const { return 1.0 - p_up_; }
  double mean_queue_length() const { return mean_; }
  // Richardson real-step value kept as the cross-check of the complex-step
  // mean.
  double mean_queue_length_crosscheck() const { return mean_check_; }

  // PGF of the queue length at uptime starts (Lemma-level N epoch).
  cplx pgf_n(cplx p) const;
  // Conditional PGFs given server up / down, and the time-stationary total.
  cplx pgf_up(cplx p) const;
  cplx pgf_down(cplx p) const;
  cplx pgf(cplx p) const;
  double pgf(double p) const { return pgf(cplx(p, 0.0)).real(); }

  // Queue-length pmf over {0..n_max} by trapezoid inversion of the PGF on a
  // circle whose radius keeps the aliasing error below 1e-10. n_max <= 4096.
  std::vector<double> pmf(int n_max) const;

  // Kernel surface, exposed for verification. w(p) = p - B~(sigma +
  // lambda(1-p)) carries the busy-period pole; the de-poled forms are
  // A(p)*w(p) and K(p)*w(p) and stay finite across mu(sigma).
  cplx kernel_w(cplx p) const;
  cplx kernel_a_depoled(cplx p) const;
  cplx kernel_k_depoled(cplx p) const;
  cplx kernel_A(cplx p) const;
  cplx kernel_K(cplx p) const;
  cplx kernel_E(cplx p) const;
  cplx kernel_F(cplx p) const;
  cplx kernel_G(cplx p) const;

 private:
  cplx sarr(cplx p) const { return spec_.lambda * (cplx(1.0, 0.0) - p); }
  cplx service_lst(cplx p) const;  // B~(sigma + lambda(1-p))
  cplx dtilde(cplx s) const;
  cplx pgf_num(cplx p) const;  // F(p) x + G(p) y, de-poled (times w^2)
  cplx pgf_den(cplx p) const;  // 1 - E(p), de-poled (times w^2)
  cplx kappa_diff(cplx r, cplx chi_s, cplx gs) const;
  cplx clamp_near_pole(cplx p) const;
  void guard_pole(cplx p) const;

  double solve_busy_root() const;
  void build_constants();
  void solve_phi();
  void solve_boundary();
  void compute_mean();

  VacQueueSpec spec_;
  double dtol_;
  double mu_ = 0.0;
  double limAK_ = 0.0;
  double kg_ = 0.0;  // coefficient of E[N mu^N] in the pole limit
  double ed_ = 0.0, ed2_ = 0.0;
  double p_up_ = 0.0;
  double phi_ = 0.0;
  double x_ = 0.0, y_ = 0.0;
  double mean_ = 0.0, mean_check_ = 0.0;
};

// Free-function forms of the per-operation surface.
double busy_root(const VacQueueSpec& spec);
double phi_root(const VacQueueSpec& spec);
std::pair<double, double> boundary_constants(const VacQueueSpec& spec);
double mean_queue_length(const VacQueueSpec& spec);
std::vector<double> queue_length_pmf(const VacQueueSpec& spec, int n_max);

struct QueueSummary {
  double mean;
  double p_up;
  double p_down;
  double phi;
  double mu;
  double ex_mu_pow_n;
  double ex_n_mu_pow_n;
  std::vector<double> pmf;
};

QueueSummary summarize(const VacationQueueAnalysis& analysis, int n_max);

// CSV row: mean,p_up,p_down,phi,mu,ex_mu_pow_n,ex_n_mu_pow_n,pmf0,pmf1,...
std::string queue_summary_csv_header(int n_max);
std::string to_csv_row(const QueueSummary& summary);

}  // namespace layerq
