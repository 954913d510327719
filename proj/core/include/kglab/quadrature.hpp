#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace kglab {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;   // estimated absolute error bound
  std::size_t evals = 0;
  bool converged = false;
};

namespace detail {

// 15-point Kronrod / 7-point Gauss pair (QUADPACK dqk15 constants).
inline constexpr double kGK15X[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kGK15WK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGK15WG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace detail

// One Gauss-Kronrod 15(7) panel on [a, b].
template <class F>
QuadResult gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = detail::kGK15WK[7] * fc;
  double gauss = detail::kGK15WG[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * detail::kGK15X[j];
    const double fsum = f(c - dx) + f(c + dx);
    kron += detail::kGK15WK[j] * fsum;
    if (j % 2 == 1) gauss += detail::kGK15WG[j / 2] * fsum;
  }
  QuadResult r;
  r.value = kron * h;
  r.error = std::fabs((kron - gauss) * h);
  // QUADPACK-style sharpening of the raw |K-G| estimate.
  if (r.error > 0.0) r.error = std::pow(200.0 * r.error, 1.5);
  r.error = std::min(r.error, std::fabs(kron - gauss) * std::fabs(h) * 200.0);
  r.evals = 15;
  return r;
}

// Globally adaptive Gauss-Kronrod integration: keeps a worst-first queue of
// panels and bisects until sum(error) <= max(abs_tol, rel_tol*|value|).
// `init_segments` pre-splits [a, b] (oscillatory integrands need panels no
// wider than a fraction of a period for the error estimate to be trusted).
template <class F>
QuadResult adaptive_gk(F&& f, double a, double b, double abs_tol, double rel_tol,
                       std::size_t init_segments = 1, std::size_t max_evals = 50'000'000) {
  struct Seg {
    double a, b, value, error;
    bool operator<(const Seg& o) const { return error < o.error; }
  };
  std::priority_queue<Seg> segs;
  QuadResult total;
  if (!(b > a)) {
    total.converged = true;
    return total;
  }
  if (init_segments < 1) init_segments = 1;
  const double step = (b - a) / double(init_segments);
  double value = 0.0, error = 0.0;
  for (std::size_t i = 0; i < init_segments; ++i) {
    const double lo = a + double(i) * step;
    const double hi = (i + 1 == init_segments) ? b : lo + step;
    const QuadResult r = gk15(f, lo, hi);
    segs.push({lo, hi, r.value, r.error});
    value += r.value;
    error += r.error;
    total.evals += r.evals;
  }
  auto tol = [&] { return std::max(abs_tol, rel_tol * std::fabs(value)); };
  while (error > tol() && total.evals + 30 <= max_evals) {
    const Seg worst = segs.top();
    segs.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Panel at roundoff width; its error is irreducible.
      segs.push(worst);
      break;
    }
    const QuadResult rl = gk15(f, worst.a, mid);
    const QuadResult rr = gk15(f, mid, worst.b);
    value += rl.value + rr.value - worst.value;
    error += rl.error + rr.error - worst.error;
    segs.push({worst.a, mid, rl.value, rl.error});
    segs.push({mid, worst.b, rr.value, rr.error});
    total.evals += rl.evals + rr.evals;
  }
  total.value = value;
  total.error = error;
  total.converged = error <= tol();
  return total;
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
// Deterministic, ~1e-15 accurate; used for fixed-order smooth panels.
inline void legendre_rule(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

}  // namespace kglab
