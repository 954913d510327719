#include "kglab/special.hpp"

#include <cmath>
#include <stdexcept>

namespace kglab {

namespace {

// Shared 6-term cardinal series: 1 -+ x^2/3! + x^4/5! -+ ... up to x^10/11!.
// For |x| < 1e-4 the first omitted term is < 1e-52, far below double roundoff.
double cardinal_series(double x2_signed) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 6; ++k) {
    term *= x2_signed / double((2 * k) * (2 * k + 1));
    sum += term;
  }
  return sum;
}

}  // namespace

double sinc(double x) {
  if (std::fabs(x) < kCardinalSeriesThreshold) return cardinal_series(-x * x);
  return std::sin(x) / x;
}

double sinhc(double x) {
  if (std::fabs(x) < kCardinalSeriesThreshold) return cardinal_series(x * x);
  return std::sinh(x) / x;
}

double exprel(double x) {
  if (x == 0.0) return 1.0;
  return std::expm1(x) / x;
}

long double exprel(long double x) {
  if (x == 0.0L) return 1.0L;
  return std::expm1(x) / x;
}

std::complex<double> e1_imag_axis(double x) {
  if (!(x > 0.0)) throw std::domain_error("e1_imag_axis: x must be > 0");
  const std::complex<double> z(0.0, x);
  if (x <= 3.0) {
    // E1(z) = -gamma - log z + sum_{k>=1} (-1)^{k+1} z^k / (k k!)
    const double kEulerGamma = 0.57721566490153286060651209;
    std::complex<double> sum = 0.0, term = 1.0;
    for (int k = 1; k <= 40; ++k) {
      term *= -z / double(k);
      const std::complex<double> add = -term / double(k);
      sum += add;
      if (std::abs(add) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return -kEulerGamma - std::log(z) + sum;
  }
  // Modified Lentz continued fraction:
  //   E1(z) = e^{-z} / (z + 1 - 1/(z + 3 - 4/(z + 5 - 9/(...))))
  const std::complex<double> one = 1.0;
  std::complex<double> b = z + 1.0;
  std::complex<double> c = 1.0 / 1e-300;
  std::complex<double> d = one / b;
  std::complex<double> h = d;
  for (int i = 1; i <= 200; ++i) {
    const double ai = -double(i) * double(i);
    b += 2.0;
    d = one / (ai * d + b);
    c = b + ai / c;
    const std::complex<double> delta = c * d;
    h *= delta;
    if (std::abs(delta - one) < 1e-16) break;
  }
  return h * std::exp(-z);
}

double sine_integral(double x) {
  if (x == 0.0) return 0.0;
  if (x < 0.0) return -sine_integral(-x);
  // E1(ix) = -Ci(x) + i(Si(x) - pi/2)
  return 1.57079632679489661923 + e1_imag_axis(x).imag();
}

double cosine_integral(double x) {
  if (!(x > 0.0)) throw std::domain_error("cosine_integral: x must be > 0");
  return -e1_imag_axis(x).real();
}

std::complex<double> phi_derivative(std::complex<double> u, int n) {
  if (n < 0 || n > 5) throw std::domain_error("phi_derivative: n out of range");
  if (std::abs(u) < 1.0) {
    // phi^(n)(u) = sum_{j>=0} ((j+n)!/j!) u^j / (j+n+1)! = sum_j u^j / (j! (j+n+1))
    std::complex<double> sum = 0.0, upow_over_jfact = 1.0;
    for (int j = 0; j <= 30; ++j) {
      const std::complex<double> add = upow_over_jfact / double(j + n + 1);
      sum += add;
      if (std::abs(add) < 1e-18 * (1.0 + std::abs(sum))) break;
      upow_over_jfact *= u / double(j + 1);
    }
    return sum;
  }
  // u*phi^(k) = e^u - k*phi^(k-1); error amplification <= n!/|u|^n, benign
  // for |u| >= 1.
  const std::complex<double> eu = std::exp(u);
  std::complex<double> phi = (eu - 1.0) / u;
  for (int k = 1; k <= n; ++k) phi = (eu - double(k) * phi) / u;
  return phi;
}

}  // namespace kglab
