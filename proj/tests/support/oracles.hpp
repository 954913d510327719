#pragma once
// Independent numerical routes to quantities the library computes in closed
// form or by spectral integration. Test-only: favors transparency over speed.
#include <cmath>
#include <complex>

#include "kglab/model.hpp"

namespace oracles {

template <class V, class F>
V simpson_rec(const F& f, double lo, double hi, V flo, V fmid, V fhi, V whole, double tol,
              int depth) {
  const double mid = 0.5 * (lo + hi);
  const V fl = f(0.5 * (lo + mid));
  const V fr = f(0.5 * (mid + hi));
  const V left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid);
  const V right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi);
  const V delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, lo, mid, flo, fl, fmid, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, mid, hi, fmid, fr, fhi, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson; value type follows the integrand (double or complex).
template <class F>
auto simpson(const F& f, double lo, double hi, double tol, int depth = 48) {
  using V = decltype(f(lo));
  if (!(hi > lo)) return V{};
  const V flo = f(lo), fhi = f(hi), fmid = f(0.5 * (lo + hi));
  const V whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
  return simpson_rec(f, lo, hi, flo, fmid, fhi, whole, tol, depth);
}

// Length of {y: |x1-y| < r1} ∩ {y: |x2-y| < r2}.
inline double overlap_length(double x1, double r1, double x2, double r2) {
  if (r1 <= 0.0 || r2 <= 0.0) return 0.0;
  const double lo = std::max(x1 - r1, x2 - r2);
  const double hi = std::min(x1 + r1, x2 + r2);
  return std::max(0.0, hi - lo);
}

// Critically damped covariance as a 1D integral in the emission time: the
// exponential weights of both cones times the overlap width of their sections.
// The overlap width is C - 2s clipped at zero, so the integrand is smooth on
// [0, s_star] once the positive range is isolated.
inline double covariance_critical_quadrature(const kglab::SpaceTimePoint& p,
                                             const kglab::SpaceTimePoint& q, double a,
                                             double tol) {
  const double smax = std::min(p.t, q.t);
  if (smax <= 0.0) return 0.0;
  const double width0 =
      std::min(p.x + p.t, q.x + q.t) - std::max(p.x - p.t, q.x - q.t);
  if (width0 <= 0.0) return 0.0;
  const double s_star = std::min(smax, 0.5 * width0);
  auto f = [&](double s) {
    return 0.25 * std::exp(-0.5 * a * ((p.t - s) + (q.t - s))) *
           overlap_length(p.x, p.t - s, q.x, q.t - s);
  };
  return simpson(f, 0.0, s_star, tol);
}

// Real-space fundamental solution for general damping: an exponentially
// weighted Bessel profile supported on the open cone |x| < t.
inline double bessel_kernel(double t, double x, double a, double m) {
  if (!(t > 0.0) || std::abs(x) >= t) return 0.0;
  const double D = 0.25 * a * a - m * m;
  const double r = std::sqrt((t - x) * (t + x));
  double base;
  if (std::abs(D) < 1e-12)
    base = 1.0;
  else if (D < 0.0)
    base = std::cyl_bessel_j(0.0, std::sqrt(-D) * r);
  else
    base = std::cyl_bessel_i(0.0, std::sqrt(D) * r);
  return 0.5 * std::exp(-0.5 * a * t) * base;
}

// Covariance by nested time-domain quadrature of the Bessel kernel product —
// independent of both the closed form and the spectral route.
inline double covariance_time_domain(const kglab::SpaceTimePoint& p,
                                     const kglab::SpaceTimePoint& q,
                                     const kglab::ModelParams& params, double tol) {
  const double smax = std::min(p.t, q.t);
  if (smax <= 0.0) return 0.0;
  auto outer = [&](double s) {
    const double r1 = p.t - s, r2 = q.t - s;
    const double lo = std::max(p.x - r1, q.x - r2);
    const double hi = std::min(p.x + r1, q.x + r2);
    if (!(hi > lo)) return 0.0;
    auto inner = [&](double y) {
      return bessel_kernel(r1, p.x - y, params.a, params.m) *
             bessel_kernel(r2, q.x - y, params.a, params.m);
    };
    return simpson(inner, lo, hi, 0.02 * tol);
  };
  return simpson(outer, 0.0, smax, tol);
}

// Frequency-space transform of the windowed kernel by direct complex
// quadrature of exp((i*tau - a/2) * sigma) * sin(xi*sigma)/xi.
inline std::complex<double> transform_quadrature(double t, double x, double tau, double xi,
                                                 const kglab::ModelParams& params, double tol) {
  using C = std::complex<double>;
  if (!(t > 0.0)) return {};
  const C i(0.0, 1.0);
  auto f = [&](double s) {
    const C e = std::exp((i * tau - 0.5 * params.a) * s);
    const double g = xi == 0.0 ? s : std::sin(xi * s) / xi;
    return e * g;
  };
  return std::exp(-i * t * tau + i * x * xi) * simpson(f, 0.0, t, tol);
}

}  // namespace oracles
