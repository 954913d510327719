#include "kglab/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kglab/errors.hpp"
#include "kglab/special.hpp"

namespace kglab {

namespace {

void require_square_steps(double ht, double hx, const char* who) {
  if (std::fabs(ht - hx) > 1e-15 * std::max(ht, hx))
    throw GridMismatchError(std::string(who) + ": requires ht == hx for cone-exact integration");
}

void require_matching(const GridField& u, const GridField& v, const char* who) {
  if (u.values.rows() != v.values.rows() || u.values.cols() != v.values.cols() ||
      u.ht != v.ht || u.hx != v.hx || u.x0 != v.x0)
    throw GridMismatchError(std::string(who) + ": grids do not match");
}

double sup_residual_trusted(const GridField& a, const GridField& b) {
  double sup = 0.0;
  for (Eigen::Index i = 0; i < a.values.rows(); ++i)
    for (Eigen::Index j = 0; j < a.values.cols(); ++j)
      if (a.trusted(i, j)) sup = std::max(sup, std::fabs(a.values(i, j) - b.values(i, j)));
  return sup;
}

// int_0^t sigma e^{-a sigma / 2} d sigma
double ramp_mass(double t, double a) {
  const double q = 0.5 * a * t;
  if (std::fabs(q) < 1e-4) {
    // t^2/2 - a t^3/6 + a^2 t^4 / 32
    return t * t * (0.5 - q / 3.0 + q * q / 8.0);
  }
  return (4.0 / (a * a)) * (1.0 - std::exp(-q) * (1.0 + q));
}

}  // namespace

GridField stochastic_convolution(const NoiseGrid& noise, double a, const GridSpec& grid) {
  if (!(grid.step > 0.0) || grid.nt == 0 || grid.nx == 0)
    throw std::invalid_argument("stochastic_convolution: empty grid");
  GridField out;
  out.x0 = grid.x0;
  out.ht = out.hx = grid.step;
  out.values.resize(Eigen::Index(grid.nt), Eigen::Index(grid.nx));
  WalshEvaluator eval(noise, a);
  for (Eigen::Index i = 0; i < out.values.rows(); ++i)
    for (Eigen::Index j = 0; j < out.values.cols(); ++j)
      out.values(i, j) = eval.value_at(out.t_at(i), out.x_at(j));
  return out;
}

GridField apply_cone_integral(const GridField& u, double a) {
  require_square_steps(u.ht, u.hx, "apply_cone_integral");
  const double eta = u.ht;
  const Eigen::Index nt = u.values.rows(), nx = u.values.cols();
  GridField out;
  out.x0 = u.x0;
  out.ht = u.ht;
  out.hx = u.hx;
  out.values = Eigen::MatrixXd::Zero(nt, nx);

  // prefix(k, c) = sum of u(k, 0..c-1)
  Eigen::MatrixXd prefix(nt, nx + 1);
  for (Eigen::Index k = 0; k < nt; ++k) {
    prefix(k, 0) = 0.0;
    for (Eigen::Index c = 0; c < nx; ++c) prefix(k, c + 1) = prefix(k, c) + u.values(k, c);
  }
  auto at = [&](Eigen::Index k, Eigen::Index c) -> double {
    return (c >= 0 && c < nx) ? u.values(k, c) : 0.0;
  };

  for (Eigen::Index i = 1; i < nt; ++i) {
    for (Eigen::Index j = 0; j < nx; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < i; ++k) {
        const Eigen::Index m = i - k;  // cone half-width in cells; m >= 1
        const Eigen::Index lo = j - m, hi = j + m;
        const Eigen::Index ilo = std::max<Eigen::Index>(lo + 1, 0);
        const Eigen::Index ihi = std::min<Eigen::Index>(hi - 1, nx - 1);
        double strip = ihi >= ilo ? prefix(k, ihi + 1) - prefix(k, ilo) : 0.0;
        strip += 0.5 * (at(k, lo) + at(k, hi));
        const double wt = (k == 0) ? 0.5 : 1.0;  // s = t endpoint carries zero strip
        acc += wt * 0.5 * std::exp(-0.5 * a * eta * double(m)) * strip * eta;
      }
      out.values(i, j) = acc * eta;
    }
  }
  return out;
}

PicardSolution picard_solve(const GridField& u_C, const ModelParams& params, double tol,
                            int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("picard_solve: max_iter must be >= 1");
  const double lambda = params.coupling();
  PicardSolution sol;
  sol.u = u_C;
  for (int it = 1; it <= max_iter; ++it) {
    GridField next = apply_cone_integral(sol.u, params.a);
    next.values = u_C.values + lambda * next.values;
    const double res = sup_residual_trusted(next, sol.u);
    sol.u = std::move(next);
    sol.report.iterations = it;
    sol.report.residual_history.push_back(res);
    if (res < tol) {
      sol.report.converged = true;
      break;
    }
  }
  return sol;
}

double fixed_point_residual(const GridField& u, const GridField& u_C, const ModelParams& params) {
  require_matching(u, u_C, "fixed_point_residual");
  GridField rhs = apply_cone_integral(u, params.a);
  rhs.values = u_C.values + params.coupling() * rhs.values;
  return sup_residual_trusted(u, rhs);
}

DecomposeResult decompose(const GridField& u, const GridField& u_C) {
  require_matching(u, u_C, "decompose");
  require_square_steps(u.ht, u.hx, "decompose");
  DecomposeResult res;
  res.u_L = u;
  res.u_L.values = u.values - u_C.values;
  const Eigen::Index nt = u.values.rows(), nx = u.values.cols();
  const double eta = u.ht;
  for (Eigen::Index i = 0; i < nt; ++i)
    for (Eigen::Index j = 0; j < nx; ++j) {
      if (!u.trusted(i, j)) continue;
      res.sup_abs_u = std::max(res.sup_abs_u, std::fabs(u.values(i, j)));
      for (Eigen::Index k = 1; i + k < nt && j + k < nx; ++k) {
        if (!u.trusted(i + k, j + k)) continue;
        const double diff = std::fabs(res.u_L.values(i + k, j + k) - res.u_L.values(i, j));
        res.lipschitz_statistic = std::max(res.lipschitz_statistic, diff / (double(k) * eta));
      }
    }
  return res;
}

ShiftMasses characteristic_shift_masses(double t, double h, double a) {
  if (t < 0.0 || h < 0.0 || a < 0.0)
    throw std::invalid_argument("characteristic_shift_masses: arguments must be non-negative");
  ShiftMasses m;
  m.overlap = -std::expm1(-0.5 * a * h) * ramp_mass(t, a);
  m.sliver = h * std::exp(-0.5 * a * h) * t * exprel(-0.5 * a * t);
  m.cap = ramp_mass(h, a);
  return m;
}

}  // namespace kglab
