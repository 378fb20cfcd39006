#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace layerq {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (G7-K15) quadrature for complex-valued integrands.
// ---------------------------------------------------------------------------

namespace detail {
// Positive abscissae of the 15-point Kronrod rule; rows: node, Gauss weight
// (zero where the node is Kronrod-only), Kronrod weight.
inline constexpr double kGk15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0,               0.204432940075298},
    {0.586087235467691, 0.0,               0.169004726639267},
    {0.864864423359769, 0.0,               0.104790010322250},
    {0.991455371120813, 0.0,               0.022935322010529}};
}  // namespace detail

template <class F>
cplx gk15(const F& f, double a, double b, double& err) {
  const double mid = 0.5 * (a + b);
  const double hl = 0.5 * (b - a);
  cplx y0 = f(mid);
  cplx g7 = detail::kGk15[0][1] * y0;
  cplx k15 = detail::kGk15[0][2] * y0;
  for (int i = 1; i < 8; ++i) {
    const double dx = hl * detail::kGk15[i][0];
    const cplx yi = f(mid + dx) + f(mid - dx);
    g7 += detail::kGk15[i][1] * yi;
    k15 += detail::kGk15[i][2] * yi;
  }
  g7 *= hl;
  k15 *= hl;
  err = std::abs(k15 - g7);
  return k15;
}

struct QuadResult {
  cplx value;
  double error;  // accumulated local error estimate
};

// Bisection-adaptive G7-K15 with an absolute tolerance budget split across
// subintervals. Throws when the recursion depth is exhausted before the
// estimate meets tolerance.
template <class F>
QuadResult quad_adaptive(const F& f, double a, double b, double abs_tol, int max_depth = 48) {
  struct Worker {
    const F& f;
    double total_err = 0.0;
    cplx rec(double a, double b, double tol, int depth) {
      double err;
      cplx v = gk15(f, a, b, err);
      if (err <= tol || depth <= 0) {
        if (err > tol && depth <= 0)
          throw std::runtime_error("quad_adaptive: tolerance not reached (estimate " +
                                   std::to_string(err) + ")");
        total_err += err;
        return v;
      }
      const double m = 0.5 * (a + b);
      return rec(a, m, 0.5 * tol, depth - 1) + rec(m, b, 0.5 * tol, depth - 1);
    }
  } w{f};
  cplx v = w.rec(a, b, abs_tol, max_depth);
  return {v, w.total_err};
}

// ---------------------------------------------------------------------------
// Differentiation helpers.
// ---------------------------------------------------------------------------

// Complex-step first derivative of an analytic evaluator at real x.
template <class F>
double complex_step_derivative(const F& f, double x, double h = 1e-20) {
  return f(cplx(x, h)).imag() / h;
}

// One-sided Richardson tableau on backward differences (f(x) - f(x-h))/h,
// halving h each level. `fx` is the (often exactly known) value at x.
template <class F>
double richardson_backward_derivative(const F& f, double x, double fx, double h0 = 1e-3,
                                      int levels = 6) {
  std::vector<double> row(levels), prev(levels);
  double h = h0;
  for (int i = 0; i < levels; ++i) {
    row[0] = (fx - f(x - h)) / h;
    for (int j = 1; j <= i; ++j) {
      const double p = std::pow(2.0, j);
      row[j] = (p * row[j - 1] - prev[j - 1]) / (p - 1.0);
    }
    std::swap(row, prev);
    h *= 0.5;
  }
  return prev[levels - 1];
}

// Central difference with one Richardson refinement; used as a cross-check
// against complex-step values.
template <class F>
double central_derivative(const F& f, double x, double h = 1e-6) {
  const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
  const double d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// ---------------------------------------------------------------------------
// Radix-2 FFT (in place, forward: sign = -1).
// ---------------------------------------------------------------------------

inline void fft_pow2(std::vector<cplx>& a, int sign) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft_pow2: size must be 2^k");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * 3.14159265358979323846 / static_cast<double>(len);
    const cplx wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Small dense linear solves (partial pivoting). Sizes here are 2 and 5.
// ---------------------------------------------------------------------------

inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) throw std::runtime_error("solve_dense: singular matrix");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double m = a[r][col] / a[col][col];
      if (m == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= m * a[col][c];
      b[r] -= m * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) acc -= a[ri][c] * x[c];
    x[ri] = acc / a[ri][ri];
  }
  return x;
}

// ---------------------------------------------------------------------------
// Student-t 97.5% quantile for confidence half-widths.
// ---------------------------------------------------------------------------

inline double student_t_975(int df) {
  static constexpr double table[] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df <= 0) return std::numeric_limits<double>::quiet_NaN();
  if (df <= 30) return table[df - 1];
  // 1/df interpolation toward the normal quantile.
  return 1.959964 + (2.042 - 1.959964) * (30.0 / static_cast<double>(df));
}

}  // namespace layerq
