#pragma once

#include <complex>
#include <string>
#include <variant>

#include "layerq/rng.hpp"

namespace layerq {

using cplx = std::complex<double>;

// Parametric nonnegative service/repair/downtime distributions. The four
// families are exactly the ones the two-moment fit can produce, so every
// Laplace-Stieltjes transform stays in closed form.
struct Exponential {
  double rate;
};

struct Deterministic {
  double value;
};

// Mixture of Erlang(k, gamma) with weight q and Erlang(k-1, gamma) with
// weight 1-q; k >= 2.
struct ErlangMixture {
  int k;
  double gamma;
  double q;
};

// Two-phase hyperexponential: branch 1 with probability p1 and rate rate1,
// branch 2 otherwise. The fitter produces balanced means (p1/rate1 ==
// p2/rate2) but the type admits any valid parameters.
struct Hyper2 {
  double p1;
  double rate1;
  double rate2;
};

using DistSpec = std::variant<Exponential, Deterministic, ErlangMixture, Hyper2>;

struct MomentSummary {
  double m1;   // mean
  double m2;   // second raw moment
  double scv;  // squared coefficient of variation, m2/m1^2 - 1
};

// Throws std::invalid_argument for out-of-range parameters.
void validate(const DistSpec& dist);

// E[exp(-sX)] for Re(s) >= 0 (complex arguments by analytic continuation of
// the real closed forms). Throws std::domain_error when Re(s) < 0.
cplx lst(const DistSpec& dist, cplx s);
double lst(const DistSpec& dist, double s);

// d/ds of the LST (closed form per family).
cplx lst_prime(const DistSpec& dist, cplx s);

MomentSummary moments(const DistSpec& dist);

// Two-moment fit: deterministic for scv 0, exponential for scv 1, an
// Erlang(k-1)/Erlang(k) mixture for 0 < scv < 1 (k = ceil(1/scv), ties to
// the smaller k) and a balanced-means H2 for scv > 1. The fitted family
// reproduces (m1, m2) exactly. Throws when m2 < m1^2.
DistSpec fit_two_moment(double m1, double m2);

double sample(const DistSpec& dist, Rng& rng);

// Distribution of c*X.
DistSpec scale_time(const DistSpec& dist, double c);

std::string family_name(const DistSpec& dist);

}  // namespace layerq
