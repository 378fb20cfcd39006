#pragma once

#include <utility>
#include <variant>

#include "layerq/dist.hpp"

namespace layerq {

// The exponent g of the one-dependent downtime recursion
//   E[exp(-s D(k+1)) | D(k) = t] = chi(s) * exp(-g(s) t).
// g is kept constructive (four tags) so that exp(-g(s)) is the LST of an
// infinitely divisible distribution by construction and increments can be
// sampled for the simulation oracle.
struct GZero {};

// g(s) = slope * s: a deterministic increment of `slope` per unit of the
// previous downtime.
struct GLinear {
  double slope;
};

// g(s) = theta * (1 - jumpLST(s)): a compound-Poisson increment running at
// rate theta per unit of the previous downtime.
struct GCompoundPoisson {
  double theta;
  DistSpec jump;
};

// g(s) = -log(baseLST(s)). Not samplable in general; kept for analysis.
struct GLogLst {
  DistSpec base;
};

using GFunction = std::variant<GZero, GLinear, GCompoundPoisson, GLogLst>;

cplx g_eval(const GFunction& g, cplx s);
double g_eval(const GFunction& g, double s);
double g_prime0(const GFunction& g);   // g'(0), dimensionless, must be < 1
double g_second0(const GFunction& g);  // g''(0) <= 0

// True for the tags whose increments the simulator can draw (Zero, Linear,
// CompoundPoisson).
bool samplable(const GFunction& g);

struct DependencePair {
  DistSpec chi;
  GFunction g;
  // Cached derivative data at 0.
  double chi1;  // chi'(0) < 0
  double chi2;  // chi''(0) > 0
  double g1;    // g'(0) in [0,1)
  double g2;    // g''(0) <= 0

  static DependencePair make(DistSpec chi, GFunction g);
};

struct DowntimeStats {
  double mean;   // E[D]
  double m2;     // E[D^2]
  double joint;  // E[D(k) D(k+1)]
  double cov;    // joint - mean^2
  double corr;   // cov / variance, in [0,1)
};

struct ProductLst {
  cplx value;
  double tail_bound;  // bound on |log-remainder| of the truncated product
  int factors;
};

// Stationary downtime LST via the infinite product prod_j chi(g^(j)(s)),
// truncated once the remainder bound drops below tol (scaled with |s| so the
// truncation stays accurate relative to s near 0, where derivative probes
// live). min_factors forces extra depth for convergence checks.
ProductLst stationary_lst_detail(const DependencePair& pair, cplx s, double tol,
                                 int min_factors = 0);
cplx stationary_lst(const DependencePair& pair, cplx s, double tol = 1e-12);
double stationary_lst(const DependencePair& pair, double s, double tol = 1e-12);

// (E[D], E[D^2]) from the cached derivatives.
std::pair<double, double> stationary_moments(const DependencePair& pair);

// Lag-1 joint expectation, covariance and correlation of consecutive
// downtimes in steady state.
DowntimeStats lag1_stats(const DependencePair& pair);

// The phase-counting example pair: chi = Exp(delta), g(s) = s/(delta+s)
// (compound Poisson at unit rate with Exp(delta) jumps). Stationary downtime
// is Exp(delta-1); requires delta > 1.
DependencePair phase_compound_pair(double delta);

// Independent downtimes with the given marginal: chi = dist, g = 0.
DependencePair independent_pair(const DistSpec& dist);

// Construct a pair whose derivative data equals (chi1, chi2, g1, g2):
// chi by a two-moment fit of (-chi1, chi2); g is Zero when g1 = 0, Linear
// when g2 = 0, otherwise compound Poisson with theta = 2 g1^2 / (-g2), which
// lands the jump SCV at exactly 1 (an exponential jump). Throws with the
// violated inequality named for infeasible inputs.
DependencePair from_derivatives(double chi1, double chi2, double g1, double g2);

// One step of the downtime recursion: a chi draw plus the g-increment
// accumulated over `prev`. Throws for unsamplable g tags.
double sample_next_downtime(const DependencePair& pair, double prev, Rng& rng);

}  // namespace layerq
