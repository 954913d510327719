#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <vector>

#include "kglab/model.hpp"

namespace kglab {

// E[u(p) u(q)] for the critically damped field, in closed form: the light
// cones of p and q overlap, at noise time s, in an interval of length
// (L - 2s)+ with L = sqrt2*(min z + min w), so
//   cov = 1/4 e^{-a(t+t')/2} int_0^S e^{as} (L - 2s) ds,  S = min(t, t', L/2).
// Evaluated in extended precision; relative accuracy ~1e-15.
double cov_critical(const SpaceTimePoint& p, const SpaceTimePoint& q, double a);

// Same, with the noise-time integration capped at s_cap (covariance of the
// field built from noise up to s_cap only).
double cov_critical_truncated(const SpaceTimePoint& p, const SpaceTimePoint& q, double a,
                              double s_cap);

// E[u(p) u(q)] for any regime through the spectral representation
//   (1/2pi) int_0^{min(t,t')} int_R G^(t-s,xi) G^(t'-s,xi) cos(xi(x-x')) dxi ds.
// The s-integral is elementary and folded in; xi is integrated adaptively up
// to an analytic tail. `tol` is relative; if the certified error exceeds it,
// throws ToleranceNotMet carrying the estimate and the bound.
double cov_spectral(const SpaceTimePoint& p, const SpaceTimePoint& q, const ModelParams& params,
                    double tol = 1e-8);

// Regime dispatch: closed form when critically damped, spectral otherwise.
double covariance(const SpaceTimePoint& p, const SpaceTimePoint& q, const ModelParams& params);

double variance(const SpaceTimePoint& p, const ModelParams& params);

// E[(u(p) - u(q))^2].
double increment_moment(const SpaceTimePoint& p, const SpaceTimePoint& q,
                        const ModelParams& params);

// Second moment of the rectangular increment over the characteristic
// rectangle at (t, x) with side lengths eps1 (along w) and eps2 (along z):
// E[(u(P) - u(P1) - u(P2) + u(P12))^2], 0 < eps_i < t.
// Critically damped params: evaluated by region integration and cross-checked
// against the 4x4 covariance combination (ToleranceNotMet on disagreement).
// Otherwise: covariance combination through the spectral engine.
double rect_increment_moment(double t, double x, double eps1, double eps2,
                             const ModelParams& params);

// The two routes individually (for dual-route verification).
double rect_increment_moment_combination(double t, double x, double eps1, double eps2,
                                         const ModelParams& params);
double rect_increment_moment_regions(double t, double x, double eps1, double eps2, double a);

// Brownian scale of the characteristic boundary process: sqrt2 (e^{a t0}-1)/a.
double c0_scale(double t0, double a);

// Covariances of the two F_{t0}-measurable building blocks of the field
// restricted to noise before t0, in characteristic coordinates:
//   cov_X: int_0^{min(t0, L/2)} e^{as} (L - 2s) ds, L = sqrt2 (z^z' + w^w')
//   cov_Y: c0_scale(t0, a) * min(z, z')              (z, z' >= 0)
double cov_X(const CharCoords& p, const CharCoords& q, double t0, double a);
double cov_Y(double z, double zp, double t0, double a);

struct CovarianceMatrix {
  std::vector<SpaceTimePoint> points;
  Eigen::MatrixXd entries;
  // Row-major CSV; header row lists the points as "(t,x)" column labels.
  void write_csv(std::ostream& os) const;
};

CovarianceMatrix build_covariance(std::span<const SpaceTimePoint> points,
                                  const ModelParams& params, double tol = 1e-8);

// Var(u(target) | u at conditioners) through the Schur complement
// sigma_tt - sigma_tc Sigma_cc^+ sigma_ct, with an eigenvalue-threshold
// pseudo-inverse (threshold 1e-12 * trace) so degenerate conditioning sets
// are handled instead of erroring.
double conditional_variance(const SpaceTimePoint& target,
                            std::span<const SpaceTimePoint> conditioners,
                            const ModelParams& params);

namespace detail {
// int_0^S e^{as}(L - 2s) ds, the shared light-cone overlap primitive,
// in the cancellation-free form S(L-2S) exprel(aS) + 2 S^2 psi(aS).
long double wedge_integral(long double L, long double S, long double a);
long double cov_critical_ld(long double t, long double x, long double tp, long double xp,
                            long double a, long double s_cap);
// (e^q - 1 - q)/q^2 with series guard.
long double psi2(long double q);
}  // namespace detail

}  // namespace kglab
