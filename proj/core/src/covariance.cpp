#include "kglab/covariance.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "kglab/errors.hpp"
#include "kglab/special.hpp"

namespace kglab {

namespace detail {

long double psi2(long double q) {
  if (std::fabs(q) < 1e-3L) {
    // (e^q - 1 - q)/q^2 = 1/2 + q/6 + q^2/24 + ...
    long double term = 0.5L, sum = 0.5L;
    for (int k = 3; k <= 9; ++k) {
      term *= q / k;
      sum += term;
    }
    return sum;
  }
  return (std::expm1(q) - q) / (q * q);
}

long double wedge_integral(long double L, long double S, long double a) {
  if (!(S > 0.0L)) return 0.0L;
  const long double q = a * S;
  return S * (L - 2.0L * S) * exprel(q) + 2.0L * S * S * psi2(q);
}

long double cov_critical_ld(long double t, long double x, long double tp, long double xp,
                            long double a, long double s_cap) {
  // Cone overlap at noise time s: [max(x-t, x'-t') + s, min(x+t, x'+t') - s].
  const long double right = std::min(t + x, tp + xp);
  const long double left = std::max(x - t, xp - tp);
  const long double L = right - left;
  long double S = std::min(std::min(t, tp), 0.5L * L);
  S = std::min(S, s_cap);
  if (!(S > 0.0L)) return 0.0L;
  const long double pref = std::exp(-0.5L * a * (t + tp));
  return 0.25L * pref * wedge_integral(L, S, a);
}

}  // namespace detail

double cov_critical(const SpaceTimePoint& p, const SpaceTimePoint& q, double a) {
  return double(detail::cov_critical_ld(p.t, p.x, q.t, q.x, a,
                                        std::numeric_limits<long double>::infinity()));
}

double cov_critical_truncated(const SpaceTimePoint& p, const SpaceTimePoint& q, double a,
                              double s_cap) {
  if (!(s_cap >= 0.0)) throw std::domain_error("cov_critical_truncated: s_cap must be >= 0");
  return double(detail::cov_critical_ld(p.t, p.x, q.t, q.x, a, s_cap));
}

double covariance(const SpaceTimePoint& p, const SpaceTimePoint& q, const ModelParams& params) {
  if (regime(params) == Regime::Critical) return cov_critical(p, q, params.a);
  return cov_spectral(p, q, params);
}

double variance(const SpaceTimePoint& p, const ModelParams& params) {
  return covariance(p, p, params);
}

double increment_moment(const SpaceTimePoint& p, const SpaceTimePoint& q,
                        const ModelParams& params) {
  if (regime(params) == Regime::Critical) {
    const auto inf = std::numeric_limits<long double>::infinity();
    const long double vp = detail::cov_critical_ld(p.t, p.x, p.t, p.x, params.a, inf);
    const long double vq = detail::cov_critical_ld(q.t, q.x, q.t, q.x, params.a, inf);
    const long double c = detail::cov_critical_ld(p.t, p.x, q.t, q.x, params.a, inf);
    return double(std::max(vp + vq - 2.0L * c, 0.0L));
  }
  const double v = variance(p, params) + variance(q, params) - 2.0 * covariance(p, q, params);
  return std::max(v, 0.0);
}

namespace {

// int over {sigma in [sa, sb], zeta in [za, zb], sigma + zeta > 0} of
// e^{rho (sigma + zeta)}; sa and/or za may be -inf (the exponential regions
// are always cut off by the sigma+zeta > 0 wedge, so the integral is finite).
long double region_mass(long double sa, long double sb, long double za, long double zb,
                        long double rho) {
  if (!(sb > sa) || !(zb > za)) return 0.0L;
  // g(p, r) = int_p^r e^{rho s} ds, stable for small rho.
  const auto g = [rho](long double pp, long double rr) -> long double {
    return std::exp(rho * pp) * (rr - pp) * exprel(rho * (rr - pp));
  };
  // v^2 psi2(rho v) = int_0^v (e^{rho s} - 1)/rho ds
  const auto wedge_part = [rho](long double v) -> long double {
    return v * v * detail::psi2(rho * v);
  };
  long double total = 0.0L;
  // Clipped band: zeta where the sigma+zeta > 0 line cuts the sigma-range,
  // i.e. -sb < zeta < -sa; inner integral is int_{-zeta}^{sb} e^{rho sigma}.
  {
    const long double lo = std::max(za, -sb);
    const long double hi = std::min(zb, sa == -std::numeric_limits<long double>::infinity()
                                            ? std::numeric_limits<long double>::infinity()
                                            : -sa);
    if (hi > lo) {
      // substitute v = zeta + sb in [lo+sb, hi+sb], both >= 0:
      // int e^{rho zeta} g(-zeta, sb) dzeta = int (e^{rho v} - 1)/rho dv
      total += wedge_part(hi + sb) - wedge_part(lo + sb);
    }
  }
  // Unclipped band: zeta > -sa (only when sa is finite), full sigma-range.
  if (sa != -std::numeric_limits<long double>::infinity()) {
    const long double lo = std::max(za, -sa);
    if (zb > lo) total += g(sa, sb) * g(lo, zb);
  }
  return total;
}

}  // namespace

double rect_increment_moment_regions(double t, double x, double eps1, double eps2, double a) {
  if (!(eps1 > 0.0) || !(eps1 < t) || !(eps2 > 0.0) || !(eps2 < t))
    throw std::domain_error("rect_increment_moment_regions: need 0 < eps_i < t");
  const long double W = (static_cast<long double>(t) - x) / kSqrt2;
  const long double Z = (static_cast<long double>(t) + x) / kSqrt2;
  const long double q = a / (2.0L * kSqrt2);
  const long double rho = 2.0L * q;
  const long double ninf = -std::numeric_limits<long double>::infinity();
  // On each region only some of the four kernels are alive; the survivor
  // differences share the factor e^{q(sigma+zeta)} so each region reduces to
  // a constant squared times the exponential mass of the region.
  const long double d1 = std::expm1(q * static_cast<long double>(eps1));
  const long double d2 = std::expm1(q * static_cast<long double>(eps2));
  const long double m_rect = region_mass(W - eps1, W, Z - eps2, Z, rho);
  const long double m_s1 = region_mass(ninf, W - eps1, Z - eps2, Z, rho);
  const long double m_s2 = region_mass(W - eps1, W, ninf, Z - eps2, rho);
  const long double m_q12 = region_mass(ninf, W - eps1, ninf, Z - eps2, rho);
  const long double pref = 0.25L * std::exp(-2.0L * q * (W + Z));
  return double(pref * (m_rect + d1 * d1 * m_s1 + d2 * d2 * m_s2 + d1 * d1 * d2 * d2 * m_q12));
}

double rect_increment_moment_combination(double t, double x, double eps1, double eps2,
                                         const ModelParams& params) {
  if (!(eps1 > 0.0) || !(eps1 < t) || !(eps2 > 0.0) || !(eps2 < t))
    throw std::domain_error("rect_increment_moment_combination: need 0 < eps_i < t");
  const double s1 = eps1 / kSqrt2, s2 = eps2 / kSqrt2;
  const SpaceTimePoint P{t, x};
  const SpaceTimePoint P1{t - s1, x + s1};
  const SpaceTimePoint P2{t - s2, x - s2};
  const SpaceTimePoint P12{t - s1 - s2, x + s1 - s2};
  const SpaceTimePoint pts[4] = {P, P1, P2, P12};
  const double sign[4] = {1.0, -1.0, -1.0, 1.0};
  if (regime(params) == Regime::Critical) {
    const auto inf = std::numeric_limits<long double>::infinity();
    long double acc = 0.0L;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        acc += sign[i] * sign[j] *
               detail::cov_critical_ld(pts[i].t, pts[i].x, pts[j].t, pts[j].x, params.a, inf);
    return double(std::max(acc, 0.0L));
  }
  double acc = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      const double c = cov_spectral(pts[i], pts[j], params, 1e-10);
      acc += (i == j ? 1.0 : 2.0) * sign[i] * sign[j] * c;
    }
  return std::max(acc, 0.0);
}

double rect_increment_moment(double t, double x, double eps1, double eps2,
                             const ModelParams& params) {
  if (regime(params) != Regime::Critical)
    return rect_increment_moment_combination(t, x, eps1, eps2, params);
  const double by_regions = rect_increment_moment_regions(t, x, eps1, eps2, params.a);
  const double by_comb = rect_increment_moment_combination(t, x, eps1, eps2, params);
  const double scale = std::max({std::fabs(by_regions), std::fabs(by_comb), 1e-300});
  if (std::fabs(by_regions - by_comb) > 1e-8 * scale)
    throw ToleranceNotMet("rect_increment_moment: region/combination routes disagree",
                          by_regions, std::fabs(by_regions - by_comb));
  return by_regions;
}

double c0_scale(double t0, double a) {
  if (!(t0 >= 0.0)) throw std::domain_error("c0_scale: t0 must be >= 0");
  return kSqrt2 * t0 * exprel(a * t0);
}

double cov_X(const CharCoords& p, const CharCoords& q, double t0, double a) {
  if (!(t0 >= 0.0)) throw std::domain_error("cov_X: t0 must be >= 0");
  const long double L = kSqrt2 * (std::min<long double>(p.z, q.z) + std::min<long double>(p.w, q.w));
  const long double S = std::min<long double>(t0, 0.5L * L);
  return double(detail::wedge_integral(L, S, a));
}

double cov_Y(double z, double zp, double t0, double a) {
  if (!(z >= 0.0) || !(zp >= 0.0)) throw std::domain_error("cov_Y: z, z' must be >= 0");
  return c0_scale(t0, a) * std::min(z, zp);
}

void CovarianceMatrix::write_csv(std::ostream& os) const {
  char buf[64];
  for (std::size_t j = 0; j < points.size(); ++j) {
    os << (j == 0 ? "" : ",");
    std::snprintf(buf, sizeof buf, "\"(%.17g,%.17g)\"", points[j].t, points[j].x);
    os << buf;
  }
  os << "\n";
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", entries(i, j));
      os << (j == 0 ? "" : ",") << buf;
    }
    os << "\n";
  }
}

CovarianceMatrix build_covariance(std::span<const SpaceTimePoint> points,
                                  const ModelParams& params, double tol) {
  CovarianceMatrix m;
  m.points.assign(points.begin(), points.end());
  const Eigen::Index n = Eigen::Index(points.size());
  m.entries.resize(n, n);
  const bool critical = regime(params) == Regime::Critical;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double c = critical ? cov_critical(points[i], points[j], params.a)
                                : cov_spectral(points[i], points[j], params, tol);
      m.entries(i, j) = c;
      m.entries(j, i) = c;
    }
  return m;
}

double conditional_variance(const SpaceTimePoint& target,
                            std::span<const SpaceTimePoint> conditioners,
                            const ModelParams& params) {
  const double var_t = variance(target, params);
  const Eigen::Index n = Eigen::Index(conditioners.size());
  if (n == 0) return var_t;
  Eigen::MatrixXd sig_cc(n, n);
  Eigen::VectorXd sig_tc(n);
  const bool critical = regime(params) == Regime::Critical;
  auto cov2 = [&](const SpaceTimePoint& u, const SpaceTimePoint& v) {
    return critical ? cov_critical(u, v, params.a) : cov_spectral(u, v, params);
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    sig_tc(i) = cov2(target, conditioners[i]);
    for (Eigen::Index j = i; j < n; ++j) {
      sig_cc(i, j) = cov2(conditioners[i], conditioners[j]);
      sig_cc(j, i) = sig_cc(i, j);
    }
  }
  // Eigenvalue-threshold pseudo-inverse: degenerate conditioning collapses
  // to the informative subspace instead of blowing up.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sig_cc);
  const double threshold = 1e-12 * std::max(sig_cc.trace(), 0.0);
  double reduction = 0.0;
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * sig_tc;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (eig.eigenvalues()(i) > threshold)
      reduction += proj(i) * proj(i) / eig.eigenvalues()(i);
  }
  return std::max(var_t - reduction, 0.0);
}

}  // namespace kglab
