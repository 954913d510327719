#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "kglab/kernels.hpp"
#include "kglab/model.hpp"
#include "oracles.hpp"

using namespace kglab;

namespace {

// Direct evaluation of the frequency-space kernel, independent of the library
// implementation. Long-double power series near the branch crossover.
double naive_fourier_green(double t, double xi, const ModelParams& p) {
  const long double w2 = (long double)(xi)*xi - (long double)p.discriminant();
  const long double tt = t;
  const long double damp = std::exp(-0.5L * (long double)p.a * tt);
  if (std::abs((double)w2) * t * t < 0.02) {
    const long double u = w2 * tt * tt;
    const long double series =
        1.0L - u / 6.0L + u * u / 120.0L - u * u * u / 5040.0L + u * u * u * u / 362880.0L;
    return double(damp * tt * series);
  }
  if (w2 > 0.0L) {
    const long double w = std::sqrt(w2);
    return double(damp * std::sin(w * tt) / w);
  }
  const long double k = std::sqrt(-w2);
  return double(damp * std::sinh(k * tt) / k);
}

}  // namespace

TEST_CASE("critical kernel closed form and support") {
  const double a = 2.0;
  CHECK(critical_kernel(1.0, 0.0, a) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(critical_kernel(1.0, 0.999, a) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(critical_kernel(1.0, 1.0, a) == 0.0);   // boundary excluded
  CHECK(critical_kernel(1.0, -1.2, a) == 0.0);  // outside the cone
  CHECK(critical_kernel(0.0, 0.0, a) == 0.0);
  CHECK(critical_kernel(0.5, 0.2, 0.0) == 0.5);  // undamped: plain half indicator
}

TEST_CASE("frequency kernel matches direct formula across regimes") {
  const ModelParams osc(1.0, 0.8, 2.0);    // discriminant < 0: oscillatory everywhere
  const ModelParams mix(2.0, 0.3, 2.0);    // discriminant > 0: mixed
  const ModelParams crit(2.0, 1.0, 2.0);   // critical
  const ModelParams wave(0.0, 0.0, 2.0);   // undamped wave
  for (const ModelParams& p : {osc, mix, crit, wave}) {
    for (double t : {0.2, 1.0, 1.9}) {
      for (double xi : {0.05, 0.3, 1.0, 3.7, 10.0}) {
        const double ref = naive_fourier_green(t, xi, p);
        const double got = fourier_green(t, xi, p);
        const double w2t2 = std::abs(xi * xi - p.discriminant()) * t * t;
        const double tol = w2t2 < 0.02 ? 5e-10 : 1e-12;
        CHECK(got == doctest::Approx(ref).epsilon(tol));
      }
    }
  }
}

TEST_CASE("frequency kernel is continuous through the branch crossover") {
  const ModelParams p(2.0, 0.3, 2.0);
  const double xi0 = std::sqrt(p.discriminant());
  const double t = 1.3;
  const double mid = fourier_green(t, xi0, p);
  for (double eps : {1e-7, 1e-9}) {
    CHECK(fourier_green(t, xi0 * (1.0 + eps), p) == doctest::Approx(mid).epsilon(1e-5));
    CHECK(fourier_green(t, xi0 * (1.0 - eps), p) == doctest::Approx(mid).epsilon(1e-5));
    // against the series oracle right at the crossover shoulder
    CHECK(fourier_green(t, xi0 * (1.0 + eps), p) ==
          doctest::Approx(naive_fourier_green(t, xi0 * (1.0 + eps), p)).epsilon(5e-10));
  }
}

TEST_CASE("frequency kernel evenness and envelope") {
  const ModelParams p(1.7, 0.4, 2.0);
  std::mt19937_64 rng(321);
  std::uniform_real_distribution<double> Ut(0.01, 2.0), Uxi(-12.0, 12.0);
  for (int i = 0; i < 200; ++i) {
    const double t = Ut(rng), xi = Uxi(rng);
    const double f = fourier_green(t, xi, p);
    CHECK(f == doctest::Approx(fourier_green(t, -xi, p)).epsilon(1e-15));
    CHECK(std::abs(f) <= t * (1.0 + 1e-12));  // global bound for m > 0
    const double w2 = xi * xi - p.discriminant();
    if (w2 > 0.0)
      CHECK(std::abs(f) <= std::exp(-0.5 * p.a * t) / std::sqrt(w2) * (1.0 + 1e-12));
  }
  CHECK(fourier_green(0.0, 1.0, p) == 0.0);
  CHECK_THROWS(fourier_green(2.5, 1.0, p));  // outside the [0, T] window
}

TEST_CASE("space-time transform matches complex quadrature") {
  const ModelParams p(2.0, 0.3, 2.0);
  struct Probe {
    double t, x, tau, xi;
  };
  for (const Probe& pr : {Probe{1.0, 0.3, 2.0, 1.3}, Probe{0.5, -0.2, 0.7, 3.1},
                          Probe{1.9, 1.0, 5.0, 0.4}, Probe{1.0, 0.0, 1.0, 1e-8}}) {
    const std::complex<double> got = spacetime_transform(pr.t, pr.x, pr.tau, pr.xi, p);
    const std::complex<double> ref =
        oracles::transform_quadrature(pr.t, pr.x, pr.tau, pr.xi, p, 1e-13);
    CHECK(std::abs(got - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
  }
  CHECK(std::abs(spacetime_transform(0.0, 0.4, 2.0, 1.0, p)) <= 1e-18);
}
