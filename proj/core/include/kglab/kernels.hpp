#pragma once

#include <complex>

#include "kglab/model.hpp"

namespace kglab {

// Spatial Fourier transform G^(t, xi) of the damped-wave Green's function:
//   e^{-at/2} sin(t sqrt(xi^2 - D)) / sqrt(xi^2 - D)   for xi^2 > D,
//   e^{-at/2} t                                        at  xi^2 = D,
//   e^{-at/2} sinh(t sqrt(D - xi^2)) / sqrt(D - xi^2)  for xi^2 < D,
// where D = a^2/4 - m^2. The branch point is crossed via the cardinal
// series, so the function is smooth in xi. Requires 0 <= t <= T.
double fourier_green(double t, double xi, const ModelParams& p);

// Critically damped space-time kernel: e^{-at/2}/2 on the open light cone
// {|x| < t}, zero elsewhere (including all t <= 0).
double critical_kernel(double t, double x, double a);

// Joint space-time transform of the critically damped kernel truncated to
// [0, t]:
//   F(t, x, tau, xi) = e^{-i t tau + i x xi} / (2 i xi) * [f(t,z+) - f(t,z-)],
//   f(t, z) = (e^{tz} - 1)/z,  z+- = i tau - a/2 +- i xi.
// The 1/xi singularity is removable; small |xi| evaluates the difference
// quotient through derivatives of f at the midpoint. Requires a > 0 and
// 0 <= t <= T.
std::complex<double> spacetime_transform(double t, double x, double tau, double xi,
                                         const ModelParams& p);

}  // namespace kglab
