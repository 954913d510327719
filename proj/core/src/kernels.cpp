#include "kglab/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "kglab/special.hpp"

namespace kglab {

namespace {

void check_time_window(double t, double T, const char* who) {
  if (!(t >= 0.0) || !(t <= T))
    throw std::domain_error(std::string(who) + ": t must lie in [0, T]");
}

}  // namespace

double fourier_green(double t, double xi, const ModelParams& p) {
  check_time_window(t, p.T, "fourier_green");
  const double q = xi * xi - p.discriminant();
  if (q >= 0.0) {
    return std::exp(-0.5 * p.a * t) * t * sinc(t * std::sqrt(q));
  }
  return std::exp(-0.5 * p.a * t) * t * sinhc(t * std::sqrt(-q));
}

double critical_kernel(double t, double x, double a) {
  if (!(t > 0.0) || !(std::fabs(x) < t)) return 0.0;
  return 0.5 * std::exp(-0.5 * a * t);
}

// Below this |t*xi| the difference quotient [f(t,z+) - f(t,z-)]/(z+ - z-)
// loses too many digits to cancellation and switches to the midpoint
// derivative series.
inline constexpr double kTransformSeriesThreshold = 1e-3;

std::complex<double> spacetime_transform(double t, double x, double tau, double xi,
                                         const ModelParams& p) {
  if (!(p.a > 0.0)) throw std::domain_error("spacetime_transform: requires a > 0");
  check_time_window(t, p.T, "spacetime_transform");

  const std::complex<double> i_unit(0.0, 1.0);
  const std::complex<double> phase = std::exp(i_unit * (x * xi - t * tau));
  const std::complex<double> u0 = t * std::complex<double>(-0.5 * p.a, tau);

  // F = phase * [f(t,z+) - f(t,z-)] / (z+ - z-) with z+- = itau - a/2 +- ixi;
  // in u = t*z variables the quotient is t^2 * [phi(u+) - phi(u-)] / (u+ - u-).
  if (std::fabs(t * xi) < kTransformSeriesThreshold) {
    const std::complex<double> delta2 = -t * t * xi * xi;  // (i t xi)^2
    std::complex<double> quot = phi_derivative(u0, 1);
    quot += delta2 / 6.0 * phi_derivative(u0, 3);
    quot += delta2 * delta2 / 120.0 * phi_derivative(u0, 5);
    return phase * t * t * quot;
  }
  const std::complex<double> delta = i_unit * (t * xi);
  const std::complex<double> fp = phi_derivative(u0 + delta, 0);
  const std::complex<double> fm = phi_derivative(u0 - delta, 0);
  return phase * t * t * (fp - fm) / (2.0 * delta);
}

}  // namespace kglab
