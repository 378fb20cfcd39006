#include "layerq/dependence.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace layerq {

namespace {

[[noreturn]] void infeasible(const std::string& what) {
  throw std::invalid_argument("dependence: " + what);
}

}  // namespace

cplx g_eval(const GFunction& g, cplx s) {
  return std::visit(
      [s](const auto& gg) -> cplx {
        using T = std::decay_t<decltype(gg)>;
        if constexpr (std::is_same_v<T, GZero>) {
          return cplx(0.0, 0.0);
        } else if constexpr (std::is_same_v<T, GLinear>) {
          return gg.slope * s;
        } else if constexpr (std::is_same_v<T, GCompoundPoisson>) {
          return gg.theta * (cplx(1.0, 0.0) - lst(gg.jump, s));
        } else {
          // LSTs of these families have no zeros in Re(s) >= 0, so the
          // principal branch is safe.
          return -std::log(lst(gg.base, s));
        }
      },
      g);
}

double g_eval(const GFunction& g, double s) { return g_eval(g, cplx(s, 0.0)).real(); }

double g_prime0(const GFunction& g) {
  return std::visit(
      [](const auto& gg) -> double {
        using T = std::decay_t<decltype(gg)>;
        if constexpr (std::is_same_v<T, GZero>) return 0.0;
        else if constexpr (std::is_same_v<T, GLinear>) return gg.slope;
        else if constexpr (std::is_same_v<T, GCompoundPoisson>) return gg.theta * moments(gg.jump).m1;
        else return moments(gg.base).m1;
      },
      g);
}

double g_second0(const GFunction& g) {
  return std::visit(
      [](const auto& gg) -> double {
        using T = std::decay_t<decltype(gg)>;
        if constexpr (std::is_same_v<T, GZero>) return 0.0;
        else if constexpr (std::is_same_v<T, GLinear>) return 0.0;
        else if constexpr (std::is_same_v<T, GCompoundPoisson>) return -gg.theta * moments(gg.jump).m2;
        else {
          const MomentSummary m = moments(gg.base);
          return m.m1 * m.m1 - m.m2;  // -Var of the base distribution
        }
      },
      g);
}

bool samplable(const GFunction& g) { return !std::holds_alternative<GLogLst>(g); }

DependencePair DependencePair::make(DistSpec chi, GFunction g) {
  validate(chi);
  std::visit(
      [](const auto& gg) {
        using T = std::decay_t<decltype(gg)>;
        if constexpr (std::is_same_v<T, GLinear>) {
          if (gg.slope < 0.0) infeasible("GLinear slope must be >= 0");
        } else if constexpr (std::is_same_v<T, GCompoundPoisson>) {
          if (gg.theta < 0.0) infeasible("GCompoundPoisson theta must be >= 0");
          validate(gg.jump);
        } else if constexpr (std::is_same_v<T, GLogLst>) {
          validate(gg.base);
        }
      },
      g);
  const MomentSummary mc = moments(chi);
  DependencePair pair{std::move(chi), std::move(g), -mc.m1, mc.m2, g_prime0(g), g_second0(g)};
  if (!(pair.g1 < 1.0))
    infeasible("g'(0) must be < 1 for a finite stationary mean (got " + std::to_string(pair.g1) +
               ")");
  return pair;
}

ProductLst stationary_lst_detail(const DependencePair& pair, cplx s, double tol, int min_factors) {
  if (s.real() < 0.0) throw std::domain_error("stationary_lst: Re(s) must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("stationary_lst: tol must be positive");
  if (!(pair.g1 < 1.0)) throw std::invalid_argument("stationary_lst: diverges for g'(0) >= 1");
  // The factors deviate from 1 by about |chi'(0)| g'(0)^j |s| for small s, so
  // the cutoff scales with |s| there; past the cutoff the remaining log-sum
  // is geometric with ratio g'(0).
  const double scale = std::min(1.0, std::abs(s) * std::max(std::abs(pair.chi1), 1.0));
  const double cutoff = tol * (1.0 - pair.g1) * std::max(scale, 1e-300);
  cplx value(1.0, 0.0);
  cplx cur = s;
  double dev = 0.0;
  int j = 0;
  for (;;) {
    const cplx f = lst(pair.chi, cur);
    value *= f;
    dev = std::abs(f - 1.0);
    ++j;
    if (j >= min_factors && dev < cutoff) break;
    if (j > 2000000)
      throw std::runtime_error("stationary_lst: product did not converge (g'(0) too close to 1?)");
    cur = g_eval(pair.g, cur);
  }
  const double bound = pair.g1 > 0.0 ? 1.5 * dev * pair.g1 / (1.0 - pair.g1) : 0.0;
  return {value, bound, j};
}

cplx stationary_lst(const DependencePair& pair, cplx s, double tol) {
  return stationary_lst_detail(pair, s, tol).value;
}

double stationary_lst(const DependencePair& pair, double s, double tol) {
  return stationary_lst(pair, cplx(s, 0.0), tol).real();
}

std::pair<double, double> stationary_moments(const DependencePair& pair) {
  if (!(pair.g1 < 1.0)) throw std::invalid_argument("stationary_moments: requires g'(0) < 1");
  const double mean = pair.chi1 / (pair.g1 - 1.0);
  const double m2 =
      (pair.chi2 - mean * (2.0 * pair.chi1 * pair.g1 + pair.g2)) / (1.0 - pair.g1 * pair.g1);
  return {mean, m2};
}

DowntimeStats lag1_stats(const DependencePair& pair) {
  const auto [mean, m2] = stationary_moments(pair);
  const double joint = -pair.chi1 * mean + pair.g1 * m2;
  const double cov = joint - mean * mean;
  const double var = m2 - mean * mean;
  const double corr = var > 0.0 ? cov / var : 0.0;
  return {mean, m2, joint, cov, corr};
}

DependencePair phase_compound_pair(double delta) {
  if (!(delta > 1.0))
    infeasible("phase_compound_pair: stationary downtime only exists for delta > 1");
  return DependencePair::make(Exponential{delta}, GCompoundPoisson{1.0, Exponential{delta}});
}

DependencePair independent_pair(const DistSpec& dist) {
  return DependencePair::make(dist, GZero{});
}

DependencePair from_derivatives(double chi1, double chi2, double g1, double g2) {
  if (!(chi1 < 0.0)) infeasible("from_derivatives: requires chi'(0) < 0");
  if (chi2 < chi1 * chi1 * (1.0 - 1e-12))
    infeasible("from_derivatives: chi''(0) >= chi'(0)^2 violated (negative chi variance)");
  if (!(g1 >= 0.0 && g1 < 1.0)) infeasible("from_derivatives: requires 0 <= g'(0) < 1");
  if (g2 > 1e-15) infeasible("from_derivatives: g''(0) <= 0 violated (negative increment variance)");

  DistSpec chi = fit_two_moment(-chi1, chi2);
  GFunction g = GZero{};
  if (g1 < 1e-14) {
    if (std::abs(g2) > 1e-12)
      infeasible("from_derivatives: g''(0) must vanish when g'(0) = 0");
  } else if (std::abs(g2) < 1e-14) {
    g = GLinear{g1};
  } else {
    // theta = 2 g1^2 / (-g2) makes the jump SCV exactly 1, so the fitted
    // jump is exponential and matches (g'(0), g''(0)) in closed form.
    const double theta = 2.0 * g1 * g1 / (-g2);
    g = GCompoundPoisson{theta, fit_two_moment(g1 / theta, -g2 / theta)};
  }
  return DependencePair::make(std::move(chi), std::move(g));
}

double sample_next_downtime(const DependencePair& pair, double prev, Rng& rng) {
  const double base = sample(pair.chi, rng);
  return std::visit(
      [&](const auto& gg) -> double {
        using T = std::decay_t<decltype(gg)>;
        if constexpr (std::is_same_v<T, GZero>) {
          return base;
        } else if constexpr (std::is_same_v<T, GLinear>) {
          return base + gg.slope * prev;
        } else if constexpr (std::is_same_v<T, GCompoundPoisson>) {
          const std::uint64_t n = rng.poisson(gg.theta * prev);
          double acc = base;
          for (std::uint64_t i = 0; i < n; ++i) acc += sample(gg.jump, rng);
          return acc;
        } else {
          throw std::invalid_argument(
              "sample_next_downtime: GLogLst increments are not samplable");
        }
      },
      pair.g);
}

}  // namespace layerq
