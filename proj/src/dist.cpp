#include "layerq/dist.hpp"

#include <cmath>
#include <stdexcept>

namespace layerq {

namespace {

constexpr double kScvEps = 1e-9;

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

void check_domain(cplx s) {
  if (s.real() < 0.0) throw std::domain_error("lst: Re(s) must be >= 0");
}

}  // namespace

void validate(const DistSpec& dist) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          if (!(d.rate > 0.0)) bad("Exponential: rate must be positive");
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          if (!(d.value > 0.0)) bad("Deterministic: value must be positive");
        } else if constexpr (std::is_same_v<T, ErlangMixture>) {
          if (d.k < 2) bad("ErlangMixture: k must be >= 2");
          if (!(d.gamma > 0.0)) bad("ErlangMixture: gamma must be positive");
          if (!(d.q >= 0.0 && d.q <= 1.0)) bad("ErlangMixture: q must lie in [0,1]");
        } else {
          if (!(d.p1 > 0.0 && d.p1 < 1.0)) bad("Hyper2: p1 must lie in (0,1)");
          if (!(d.rate1 > 0.0 && d.rate2 > 0.0)) bad("Hyper2: rates must be positive");
        }
      },
      dist);
}

cplx lst(const DistSpec& dist, cplx s) {
  check_domain(s);
  return std::visit(
      [s](const auto& d) -> cplx {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return d.rate / (d.rate + s);
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          return std::exp(-s * d.value);
        } else if constexpr (std::is_same_v<T, ErlangMixture>) {
          const cplx w = d.gamma / (d.gamma + s);
          const cplx wk1 = std::pow(w, d.k - 1);
          return d.q * wk1 * w + (1.0 - d.q) * wk1;
        } else {
          return d.p1 * d.rate1 / (d.rate1 + s) + (1.0 - d.p1) * d.rate2 / (d.rate2 + s);
        }
      },
      dist);
}

double lst(const DistSpec& dist, double s) { return lst(dist, cplx(s, 0.0)).real(); }

cplx lst_prime(const DistSpec& dist, cplx s) {
  check_domain(s);
  return std::visit(
      [s](const auto& d) -> cplx {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          const cplx den = d.rate + s;
          return -d.rate / (den * den);
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          return -d.value * std::exp(-s * d.value);
        } else if constexpr (std::is_same_v<T, ErlangMixture>) {
          const cplx w = d.gamma / (d.gamma + s);
          const cplx wk1 = std::pow(w, d.k - 1);
          return -(d.q * d.k * wk1 * w + (1.0 - d.q) * (d.k - 1) * wk1) / (d.gamma + s);
        } else {
          const cplx d1 = d.rate1 + s;
          const cplx d2 = d.rate2 + s;
          return -d.p1 * d.rate1 / (d1 * d1) - (1.0 - d.p1) * d.rate2 / (d2 * d2);
        }
      },
      dist);
}

MomentSummary moments(const DistSpec& dist) {
  double m1 = 0.0, m2 = 0.0;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          m1 = 1.0 / d.rate;
          m2 = 2.0 / (d.rate * d.rate);
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          m1 = d.value;
          m2 = d.value * d.value;
        } else if constexpr (std::is_same_v<T, ErlangMixture>) {
          m1 = (d.k - 1.0 + d.q) / d.gamma;
          m2 = (d.q * d.k * (d.k + 1.0) + (1.0 - d.q) * (d.k - 1.0) * d.k) / (d.gamma * d.gamma);
        } else {
          m1 = d.p1 / d.rate1 + (1.0 - d.p1) / d.rate2;
          m2 = 2.0 * (d.p1 / (d.rate1 * d.rate1) + (1.0 - d.p1) / (d.rate2 * d.rate2));
        }
      },
      dist);
  double scv = m2 / (m1 * m1) - 1.0;
  if (std::holds_alternative<Deterministic>(dist) || std::abs(scv) < 1e-15) scv = std::max(scv, 0.0);
  return {m1, m2, scv};
}

DistSpec fit_two_moment(double m1, double m2) {
  if (!(m1 > 0.0)) bad("fit_two_moment: mean must be positive");
  const double scv = m2 / (m1 * m1) - 1.0;
  if (scv < -1e-12) bad("fit_two_moment: m2 < m1^2 implies negative variance");
  if (scv < kScvEps) return Deterministic{m1};
  if (std::abs(scv - 1.0) < kScvEps) return Exponential{1.0 / m1};
  if (scv < 1.0) {
    // ceil with a tie nudge so scv exactly at 1/(k-1) picks the smaller k.
    int k = static_cast<int>(std::ceil(1.0 / scv - 1e-12));
    k = std::max(k, 2);
    const double disc = std::max(0.0, k * (1.0 + scv) - k * k * scv);
    const double p = (k * scv - std::sqrt(disc)) / (1.0 + scv);  // weight on Erlang(k-1)
    const double gamma = (k - p) / m1;
    DistSpec d = ErlangMixture{k, gamma, 1.0 - p};
    validate(d);
    return d;
  }
  const double p1 = 0.5 * (1.0 + std::sqrt((scv - 1.0) / (scv + 1.0)));
  DistSpec d = Hyper2{p1, 2.0 * p1 / m1, 2.0 * (1.0 - p1) / m1};
  validate(d);
  return d;
}

double sample(const DistSpec& dist, Rng& rng) {
  return std::visit(
      [&rng](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return rng.exponential(d.rate);
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, ErlangMixture>) {
          const int k = rng.uniform() < d.q ? d.k : d.k - 1;
          return rng.erlang(k) / d.gamma;
        } else {
          return rng.uniform() < d.p1 ? rng.exponential(d.rate1) : rng.exponential(d.rate2);
        }
      },
      dist);
}

DistSpec scale_time(const DistSpec& dist, double c) {
  if (!(c > 0.0)) bad("scale_time: factor must be positive");
  return std::visit(
      [c](const auto& d) -> DistSpec {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return Exponential{d.rate / c};
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          return Deterministic{d.value * c};
        } else if constexpr (std::is_same_v<T, ErlangMixture>) {
          return ErlangMixture{d.k, d.gamma / c, d.q};
        } else {
          return Hyper2{d.p1, d.rate1 / c, d.rate2 / c};
        }
      },
      dist);
}

std::string family_name(const DistSpec& dist) {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) return "exponential";
        else if constexpr (std::is_same_v<T, Deterministic>) return "deterministic";
        else if constexpr (std::is_same_v<T, ErlangMixture>) return "erlang-mixture";
        else return "hyper2";
      },
      dist);
}

}  // namespace layerq
