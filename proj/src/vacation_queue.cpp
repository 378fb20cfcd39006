#include "layerq/vacation_queue.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "layerq/numerics.hpp"

namespace layerq {

namespace {

constexpr double kPoleGuard = 1e-12;    // reject raw A/K this close to mu
constexpr double kPoleClamp = 1e-6;     // down-branch coefficient clamp radius
constexpr double kPhiSwitch = 1e-8;     // l'Hopital branch radius around phi
constexpr double kOne = 1e-12;          // "p is 1" radius
constexpr double kMeanStep = 1e-4;      // complex step for the mean at p=1
constexpr double kKernelStep = 1e-20;   // complex step for E',F',G' at p=1

double agreement_floor(double lambda, double step) {
  // Round-off entering through the cancelling factors near p=1 is amplified
  // by 1/(lambda h^2); below this level the two derivative routes cannot be
  // expected to agree.
  return 1e-15 / (lambda * step * step);
}

}  // namespace

std::string StabilityReport::text() const {
  std::ostringstream os;
  os << "rho = " << rho << (stable ? " < " : " >= ") << bound
     << " = E[U]/(E[U]+E[D])";
  return os.str();
}

StabilityReport stability(const VacQueueSpec& spec) {
  const double rho = spec.lambda * moments(spec.service).m1;
  const double ed = stationary_moments(spec.pair).first;
  const double bound = 1.0 / (1.0 + spec.sigma * ed);
  return {rho, bound, rho < bound};
}

VacationQueueAnalysis::VacationQueueAnalysis(VacQueueSpec spec, double product_tol)
    : spec_(std::move(spec)), dtol_(product_tol) {
  validate(spec_.service);
  if (!(spec_.lambda > 0.0)) throw std::invalid_argument("VacQueueSpec: lambda must be positive");
  if (!(spec_.sigma > 0.0)) throw std::invalid_argument("VacQueueSpec: sigma must be positive");
  const auto [ed, ed2] = stationary_moments(spec_.pair);
  ed_ = ed;
  ed2_ = ed2;
  const StabilityReport rep = stability(spec_);
  if (!rep.stable) throw UnstableSpec(rep);
  p_up_ = 1.0 / (1.0 + spec_.sigma * ed_);
  mu_ = solve_busy_root();
  build_constants();
  solve_phi();
  solve_boundary();
  compute_mean();
}

double VacationQueueAnalysis::solve_busy_root() const {
  // p <- B~(sigma + lambda(1-p)) is a contraction with modulus <= rho < 1.
  double p = 0.0;
  for (int it = 0; it < 100000; ++it) {
    const double next = lst(spec_.service, spec_.sigma + spec_.lambda * (1.0 - p));
    if (std::abs(next - p) < 1e-13) {
      p = next;
      if (!(p > 0.0 && p < 1.0))
        throw KernelDiagnostic("busy_root: fixed point left (0,1): " + std::to_string(p));
      return p;
    }
    p = next;
  }
  throw KernelDiagnostic("busy_root: fixed-point iteration exceeded 1e5 steps");
}

void VacationQueueAnalysis::build_constants() {
  const double lambda = spec_.lambda, sigma = spec_.sigma;
  const double arg = sigma + lambda * (1.0 - mu_);
  const double bprime = lst_prime(spec_.service, cplx(arg, 0.0)).real();
  const double root_slope = 1.0 + lambda * bprime;  // d/dp of w(p) at mu, > 0 under stability
  limAK_ = sigma / arg + lambda * mu_ * sigma * (1.0 - mu_) / (root_slope * arg * arg);
  kg_ = sigma * (1.0 - mu_) / (arg * root_slope);
}

cplx VacationQueueAnalysis::service_lst(cplx p) const {
  return lst(spec_.service, spec_.sigma + sarr(p));
}

cplx VacationQueueAnalysis::dtilde(cplx s) const { return stationary_lst(spec_.pair, s, dtol_); }

cplx VacationQueueAnalysis::kernel_w(cplx p) const { return p - service_lst(p); }

cplx VacationQueueAnalysis::kernel_a_depoled(cplx p) const {
  const cplx bs = service_lst(p);
  return spec_.sigma * p * (cplx(1.0, 0.0) - bs) / (spec_.sigma + sarr(p));
}

cplx VacationQueueAnalysis::kernel_k_depoled(cplx p) const {
  const cplx bs = service_lst(p);
  return -spec_.sigma * (cplx(1.0, 0.0) - p) * bs /
         (spec_.sigma + spec_.lambda * (1.0 - mu_));
}

void VacationQueueAnalysis::guard_pole(cplx p) const {
  if (std::abs(kernel_w(p)) < kPoleGuard)
    throw KernelDiagnostic(
        "kernel: A/K evaluated at the busy-period pole; use the de-poled forms");
}

cplx VacationQueueAnalysis::kernel_A(cplx p) const {
  guard_pole(p);
  return kernel_a_depoled(p) / kernel_w(p);
}

cplx VacationQueueAnalysis::kernel_K(cplx p) const {
  guard_pole(p);
  return kernel_k_depoled(p) / kernel_w(p);
}

cplx VacationQueueAnalysis::kernel_E(cplx p) const {
  guard_pole(p);
  const cplx s = sarr(p);
  const cplx w = kernel_w(p);
  const cplx at = kernel_a_depoled(p);
  return lst(spec_.pair.chi, s) * at * at * dtilde(s + g_eval(spec_.pair.g, s)) / (w * w);
}

cplx VacationQueueAnalysis::kernel_F(cplx p) const {
  guard_pole(p);
  const cplx s = sarr(p);
  const cplx w = kernel_w(p);
  const cplx at = kernel_a_depoled(p);
  const cplx kt = kernel_k_depoled(p);
  const cplx gs = g_eval(spec_.pair.g, s);
  const cplx d1 = dtilde(s + gs);
  const cplx d2 = dtilde(spec_.lambda * (1.0 - mu_) + gs);
  return lst(spec_.pair.chi, s) * kt * (at * d1 + w * d2 * limAK_) / (w * w);
}

cplx VacationQueueAnalysis::kernel_G(cplx p) const {
  guard_pole(p);
  const cplx s = sarr(p);
  const cplx gs = g_eval(spec_.pair.g, s);
  const cplx d2 = dtilde(spec_.lambda * (1.0 - mu_) + gs);
  return lst(spec_.pair.chi, s) * kernel_k_depoled(p) * d2 * kg_ / kernel_w(p);
}

cplx VacationQueueAnalysis::pgf_num(cplx p) const {
  const cplx s = sarr(p);
  const cplx w = kernel_w(p);
  const cplx at = kernel_a_depoled(p);
  const cplx kt = kernel_k_depoled(p);
  const cplx gs = g_eval(spec_.pair.g, s);
  const cplx d1 = dtilde(s + gs);
  const cplx d2 = dtilde(spec_.lambda * (1.0 - mu_) + gs);
  return lst(spec_.pair.chi, s) * kt * ((at * d1 + w * d2 * limAK_) * x_ + w * d2 * kg_ * y_);
}

cplx VacationQueueAnalysis::pgf_den(cplx p) const {
  const cplx s = sarr(p);
  const cplx w = kernel_w(p);
  const cplx at = kernel_a_depoled(p);
  return w * w - lst(spec_.pair.chi, s) * at * at * dtilde(s + g_eval(spec_.pair.g, s));
}

void VacationQueueAnalysis::solve_phi() {
  // pgf_den = (1-E(p)) w(p)^2 shares the sign of 1-E(p) on (0, mu) and stays
  // smooth through the pole, so it is the bisection target.
  const double eps = 1e-10;
  double lo = eps, hi = mu_ - eps;
  double flo = pgf_den(cplx(lo, 0.0)).real();
  double fhi = pgf_den(cplx(hi, 0.0)).real();
  if (!(flo > 0.0) || !(fhi < 0.0))
    throw KernelDiagnostic("phi_root: no sign change of 1-E(p) on (0, mu); 1-E(" +
                           std::to_string(lo) + ")=" + std::to_string(flo) + ", 1-E(" +
                           std::to_string(hi) + ")=" + std::to_string(fhi));
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = pgf_den(cplx(mid, 0.0)).real();
    if (fm > 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  // Secant polish within the bracket.
  double a = lo, b = hi, fa = flo, fb = fhi;
  for (int it = 0; it < 4; ++it) {
    if (fb == fa) break;
    const double c = b - fb * (b - a) / (fb - fa);
    if (!(c > lo - 1e-12 && c < hi + 1e-12)) break;
    a = b;
    fa = fb;
    b = c;
    fb = pgf_den(cplx(c, 0.0)).real();
  }
  phi_ = b;
}

void VacationQueueAnalysis::solve_boundary() {
  const auto ef = [this](cplx p) { return kernel_E(p); };
  const auto ff = [this](cplx p) { return kernel_F(p); };
  const auto gf = [this](cplx p) { return kernel_G(p); };
  const auto deriv_checked = [&](auto&& f, const char* name) {
    const double cs = complex_step_derivative(f, 1.0, kKernelStep);
    const double cd = central_derivative([&](double x) { return f(cplx(x, 0.0)).real(); }, 1.0);
    if (rel_diff(cs, cd) > 1e-5 && std::abs(cs - cd) > 1e-9)
      throw KernelDiagnostic(std::string("boundary_constants: complex-step and "
                                         "central-difference derivatives of ") +
                             name + " at p=1 disagree: " + std::to_string(cs) + " vs " +
                             std::to_string(cd));
    return cs;
  };
  const double e1 = deriv_checked(ef, "E");
  const double f1 = deriv_checked(ff, "F");
  const double g1 = deriv_checked(gf, "G");
  const double fphi = kernel_F(cplx(phi_, 0.0)).real();
  const double gphi = kernel_G(cplx(phi_, 0.0)).real();
  const double det = f1 * gphi - g1 * fphi;
  const double cond = (std::abs(f1) + std::abs(g1)) * (std::abs(fphi) + std::abs(gphi)) /
                      std::max(std::abs(det), 1e-300);
  if (std::abs(det) < 1e-300 || cond > 1e14)
    throw KernelDiagnostic("boundary_constants: singular 2x2 system, condition estimate " +
                           std::to_string(cond));
  // F'(1) x + G'(1) y = -E'(1);  F(phi) x + G(phi) y = 0.
  x_ = -e1 * gphi / det;
  y_ = e1 * fphi / det;
}

cplx VacationQueueAnalysis::pgf_n(cplx p) const {
  if (std::abs(p - cplx(1.0, 0.0)) < kOne) return cplx(1.0, 0.0);
  if (std::abs(p - cplx(phi_, 0.0)) < kPhiSwitch) {
    const double dn = complex_step_derivative([this](cplx z) { return pgf_num(z); }, phi_);
    const double dd = complex_step_derivative([this](cplx z) { return pgf_den(z); }, phi_);
    return cplx(dn / dd, 0.0);
  }
  return pgf_num(p) / pgf_den(p);
}

cplx VacationQueueAnalysis::pgf_up(cplx p) const {
  if (std::abs(p - cplx(1.0, 0.0)) < kOne) return cplx(1.0, 0.0);
  return pgf_n(p) / dtilde(sarr(p));
}

cplx VacationQueueAnalysis::clamp_near_pole(cplx p) const {
  const cplx d = p - cplx(mu_, 0.0);
  const double dist = std::abs(d);
  if (dist >= kPoleClamp) return p;
  // q1 and q2 are individually singular at mu although their combination is
  // finite; evaluating at the clamp radius costs O(1e-6) in the PGF there.
  const cplx dir = dist > 0.0 ? d / dist : cplx(1.0, 0.0);
  return cplx(mu_, 0.0) + kPoleClamp * dir;
}

cplx VacationQueueAnalysis::kappa_diff(cplx r, cplx chi_s, cplx gs) const {
  // integral over u of exp(chi'(0) u) [D~(r + g'(0) u) - chi(s) D~(r + g(s)
  // + g'(0) u)], computed as one quadrature so the near-cancelling pair is
  // formed pointwise.
  const double c = -spec_.pair.chi1;
  const double b = spec_.pair.g1;
  if (b == 0.0) return (dtilde(r) - chi_s * dtilde(r + gs)) / c;
  const double slope = b / c;
  const auto f = [&](double t) {
    const cplx a1 = r + slope * t;
    return std::exp(-t) * (dtilde(a1) - chi_s * dtilde(a1 + gs));
  };
  const double tail = 30.6;  // exp(-30.6) ~ 5e-14 of the envelope
  // The bracketed difference is O(|g(s)| + |1-chi(s)|); scaling the budget
  // with it keeps the quadrature error relative to s, which the derivative
  // probes at p=1 rely on.
  const double smag = std::abs(gs) + std::abs(chi_s - cplx(1.0, 0.0));
  const double tol = 1e-12 * std::min(1.0, std::max(smag, 1e-30));
  return quad_adaptive(f, 0.0, tail, tol).value / c;
}

cplx VacationQueueAnalysis::pgf_down(cplx p) const {
  if (std::abs(p - cplx(1.0, 0.0)) < kOne) return cplx(1.0, 0.0);
  p = clamp_near_pole(p);
  const cplx s = sarr(p);
  const cplx w = kernel_w(p);
  const cplx at = kernel_a_depoled(p);
  const cplx kt = kernel_k_depoled(p);
  const cplx chi_s = lst(spec_.pair.chi, s);
  const cplx gs = g_eval(spec_.pair.g, s);
  const cplx pn = pgf_n(p);
  const cplx q1 = at * (at * pn + kt * x_) / (w * w);
  const cplx q2 = kt * (limAK_ * x_ + kg_ * y_) / w;
  const cplx r2 = cplx(spec_.lambda * (1.0 - mu_), 0.0);
  return (q1 * kappa_diff(s, chi_s, gs) + q2 * kappa_diff(r2, chi_s, gs)) / s;
}

cplx VacationQueueAnalysis::pgf(cplx p) const {
  if (std::abs(p - cplx(1.0, 0.0)) < kOne) return cplx(1.0, 0.0);
  return p_up_ * pgf_up(p) + (1.0 - p_up_) * pgf_down(p);
}

void VacationQueueAnalysis::compute_mean() {
  const double cs = complex_step_derivative([this](cplx p) { return pgf(p); }, 1.0, kMeanStep);
  const double rich = richardson_backward_derivative([this](double p) { return pgf(p); }, 1.0,
                                                     1.0, 1e-3, 5);
  const double floor =
      std::max(agreement_floor(spec_.lambda, kMeanStep), agreement_floor(spec_.lambda, 6.25e-5));
  if (std::abs(cs - rich) > 1e-5 * std::max({std::abs(cs), std::abs(rich), floor}))
    throw KernelDiagnostic("mean: complex-step (" + std::to_string(cs) + ") and Richardson (" +
                           std::to_string(rich) + ") derivatives at p=1 disagree");
  mean_ = cs;
  mean_check_ = rich;
}

std::vector<double> VacationQueueAnalysis::pmf(int n_max) const {
  if (n_max < 0 || n_max > 4096)
    throw std::invalid_argument("pmf: n_max must lie in [0, 4096]");
  std::size_t n = 1;
  while (n < 2 * static_cast<std::size_t>(n_max + 1)) n <<= 1;
  n = std::max<std::size_t>(n, 64);
  // Radius keeps the geometric aliasing tail near 1e-10.
  const double radius = std::exp(std::log(1e-10) / static_cast<double>(n));
  std::vector<cplx> ring(n);
  const double step = 2.0 * 3.14159265358979323846 / static_cast<double>(n);
  for (std::size_t j = 0; j <= n / 2; ++j) {
    const double ang = step * static_cast<double>(j);
    ring[j] = pgf(cplx(radius * std::cos(ang), radius * std::sin(ang)));
  }
  for (std::size_t j = n / 2 + 1; j < n; ++j) ring[j] = std::conj(ring[n - j]);
  fft_pow2(ring, -1);
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
  double scale = 1.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = ring[k].real() / (static_cast<double>(n) * scale);
    scale *= radius;
  }
  return out;
}

double busy_root(const VacQueueSpec& spec) { return VacationQueueAnalysis(spec).busy_root(); }
double phi_root(const VacQueueSpec& spec) { return VacationQueueAnalysis(spec).phi(); }

std::pair<double, double> boundary_constants(const VacQueueSpec& spec) {
  const VacationQueueAnalysis a(spec);
  return {a.ex_mu_pow_n(), a.ex_n_mu_pow_n()};
}

double mean_queue_length(const VacQueueSpec& spec) {
  return VacationQueueAnalysis(spec).mean_queue_length();
}

std::vector<double> queue_length_pmf(const VacQueueSpec& spec, int n_max) {
  return VacationQueueAnalysis(spec).pmf(n_max);
}

QueueSummary summarize(const VacationQueueAnalysis& a, int n_max) {
  return {a.mean_queue_length(), a.p_up(),          a.p_down(),
          a.phi(),               a.busy_root(),     a.ex_mu_pow_n(),
          a.ex_n_mu_pow_n(),     a.pmf(n_max)};
}

std::string queue_summary_csv_header(int n_max) {
  std::string h = "mean,p_up,p_down,phi,mu,ex_mu_pow_n,ex_n_mu_pow_n";
  for (int k = 0; k <= n_max; ++k) h += ",pmf" + std::to_string(k);
  return h;
}

std::string to_csv_row(const QueueSummary& s) {
  char buf[64];
  std::string row;
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    if (!row.empty()) row += ',';
    row += buf;
  };
  put(s.mean);
  put(s.p_up);
  put(s.p_down);
  put(s.phi);
  put(s.mu);
  put(s.ex_mu_pow_n);
  put(s.ex_n_mu_pow_n);
  for (double v : s.pmf) put(v);
  return row;
}

}  // namespace layerq
