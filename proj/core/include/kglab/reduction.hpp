#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "kglab/model.hpp"
#include "kglab/sampler.hpp"

namespace kglab {

// Uniform space-time grid with t starting at 0. Cone-exact integration needs
// ht == hx (the cone boundary then passes through nodes).
struct GridField {
  double x0 = 0.0;
  double ht = 0.0, hx = 0.0;
  Eigen::MatrixXd values;  // rows: t nodes (t = i*ht), cols: x nodes (x = x0 + j*hx)

  double t_at(Eigen::Index i) const { return ht * double(i); }
  double x_at(Eigen::Index j) const { return x0 + hx * double(j); }
  // True when the backward cone of node (i, j) lies inside the x range, so the
  // field value there is unpolluted by the zero extension outside the grid.
  bool trusted(Eigen::Index i, Eigen::Index j) const {
    return double(j) * hx >= double(i) * ht - 1e-12 &&
           double(values.cols() - 1 - j) * hx >= double(i) * ht - 1e-12;
  }
};

struct PicardReport {
  int iterations = 0;
  std::vector<double> residual_history;  // sup-norm over the trusted region
  bool converged = false;
};

struct GridSpec {
  double step = 0.0;  // ht == hx
  std::size_t nt = 0, nx = 0;
  double x0 = 0.0;
};

// u_C on the grid: discrete light-cone stochastic integral of the noise.
GridField stochastic_convolution(const NoiseGrid& noise, double a, const GridSpec& grid);

// Deterministic light-cone integral K[u](t,x) = int_0^t int_{|x-y|<t-s}
// (1/2) e^{-a(t-s)/2} u(s,y) dy ds, trapezoid rule, cone edges on nodes.
// Values outside the x range are treated as 0 (see GridField::trusted).
GridField apply_cone_integral(const GridField& u, double a);

struct PicardSolution {
  GridField u;
  PicardReport report;
};

// Solves u = u_C + (a^2/4 - m^2) K[u] by fixed-point iteration from u_C.
PicardSolution picard_solve(const GridField& u_C, const ModelParams& params, double tol = 1e-8,
                            int max_iter = 50);

// sup over the trusted region of |u - u_C - (a^2/4 - m^2) K[u]|.
double fixed_point_residual(const GridField& u, const GridField& u_C, const ModelParams& params);

struct DecomposeResult {
  GridField u_L;               // u - u_C
  double lipschitz_statistic = 0.0;  // sup |u_L(t+h,x+h)-u_L(t,x)| / h over grid pairs
  double sup_abs_u = 0.0;            // sup |u| over the trusted region
};

DecomposeResult decompose(const GridField& u, const GridField& u_C);

// Exact kernel-difference masses for the diagonal (+h,+h) shift of the
// light-cone kernel: overlap decay, leading sliver, and vertex cap. Their sum
// divided by h bounds the Lipschitz constant of the smooth field part.
struct ShiftMasses {
  double overlap = 0.0;  // (1 - e^{-ah/2}) * int_0^t sigma e^{-a sigma/2} d sigma
  double sliver = 0.0;   // h e^{-ah/2} * int_0^t e^{-a sigma/2} d sigma
  double cap = 0.0;      // int_0^h sigma e^{-a sigma/2} d sigma  (<= h^2/2)
  double total() const { return overlap + sliver + cap; }
};

ShiftMasses characteristic_shift_masses(double t, double h, double a);

}  // namespace kglab
