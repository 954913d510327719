#pragma once

#include <complex>

namespace kglab {

// Below this |argument| the sin/sinh cardinal functions switch to their
// 6-term Taylor expansion so the removable singularity at 0 stays smooth.
inline constexpr double kCardinalSeriesThreshold = 1e-4;

// sin(x)/x and sinh(x)/x with the removable singularity filled in.
double sinc(double x);
double sinhc(double x);

// (e^x - 1)/x, exact at 0.
double exprel(double x);
long double exprel(long double x);

// Sine and cosine integrals Si(x) = int_0^x sin/u du, Ci(x) for x > 0.
// Built from the complex exponential integral E1(ix); good to ~1e-14
// relative over the whole range.
double sine_integral(double x);
double cosine_integral(double x);

// E1(ix) for real x > 0 (series for small x, continued fraction otherwise).
std::complex<double> e1_imag_axis(double x);

// phi(u) = (e^u - 1)/u and its n-th derivative, n <= 5, for complex u.
// Series near 0, the recurrence u*phi^(n) + n*phi^(n-1) = e^u away from it.
std::complex<double> phi_derivative(std::complex<double> u, int n);

}  // namespace kglab
