#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "kglab/model.hpp"
#include "kglab/rng.hpp"

namespace kglab {

struct FieldSample {
  // For path samples (sampler == "y_path") the point's t slot holds the path
  // coordinate z and x is zero.
  std::vector<SpaceTimePoint> points;
  Eigen::VectorXd values;
  SeedSpec seed;
  std::string sampler;
};

// Covariance assembled and factored once; replicas are then cheap
// factor-times-normals products. Exactly duplicated points share one slot in
// the factored system, and zero-variance points (e.g. t = 0) are pinned to 0
// rather than fed to the factorization.
class GaussianDesign {
 public:
  GaussianDesign(std::vector<SpaceTimePoint> points, const ModelParams& params, double tol = 1e-8);

  const std::vector<SpaceTimePoint>& points() const { return points_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  std::size_t size() const { return points_.size(); }

  Eigen::VectorXd sample(const SeedSpec& seed, StreamId stream = StreamId::ExactSampler) const;

 private:
  std::vector<SpaceTimePoint> points_;
  Eigen::MatrixXd cov_;                    // on the deduplicated point set
  Eigen::MatrixXd factor_;                 // on the active (positive-variance) subset
  std::vector<std::size_t> slot_of_point_; // point index -> dedup slot
  std::vector<std::ptrdiff_t> active_of_slot_;  // dedup slot -> row in factor_, or -1
};

FieldSample sample_exact(const std::vector<SpaceTimePoint>& points, const ModelParams& params,
                         const SeedSpec& seed, double tol = 1e-8);

// White-noise increments on a space-time grid starting at s = 0. Cells store
// the increments W(cell) themselves; variance of each is s_step * y_step.
struct NoiseGrid {
  double s_step = 0.0, y_step = 0.0;
  double y0 = 0.0;
  Eigen::MatrixXd cells;  // rows: s slabs, cols: y cells

  static NoiseGrid generate(double s_extent, double y_lo, double y_hi, double s_step,
                            double y_step, const SeedSpec& seed,
                            StreamId stream = StreamId::NoiseGrid);
  static NoiseGrid zeros(double s_extent, double y_lo, double y_hi, double s_step, double y_step);

  // Merge 2x2 blocks by summation: the exact same noise at half resolution.
  NoiseGrid coarsen() const;

  double s_extent() const { return s_step * double(cells.rows()); }
  double y_end() const { return y0 + y_step * double(cells.cols()); }
};

// Discretized light-cone stochastic integral against a noise realization.
// Kernel values are taken at cell centers; per-row prefix sums make each
// evaluation O(n_s).
class WalshEvaluator {
 public:
  WalshEvaluator(const NoiseGrid& noise, double a);
  // Throws CoverageError if the backward cone of (t,x) exits the noise grid.
  double value_at(double t, double x) const;

 private:
  const NoiseGrid* noise_;
  double a_;
  Eigen::MatrixXd prefix_;  // prefix_(i, j) = sum of cells(i, 0..j-1)
};

struct WalshGridSpec {
  std::vector<SpaceTimePoint> outputs;
  double s_step = 0.0, y_step = 0.0;
  double s_extent = 0.0;
  double y_lo = 0.0, y_hi = 0.0;
};

FieldSample sample_grid_walsh(const WalshGridSpec& spec, double a, const SeedSpec& seed);
// Same evaluation against caller-provided noise (test hook; also reused by the
// integral-equation solver).
FieldSample walsh_on_noise(const std::vector<SpaceTimePoint>& outputs, const NoiseGrid& noise,
                           double a);

// Characteristic-line increments of the early-time field piece:
//   du1(w, h) = e^{-a(w+z0)/(2 sqrt 2)} [ (e^{-ah/2}-1)/2 * X(w, z0)
//                                       + e^{-ah/2}/2 * (Y(z0+sqrt2 h)-Y(z0)) ]
// with X and the Y increments independent (disjoint noise strips).
struct CharLineSample {
  double z0 = 0.0, t0 = 0.0, a = 0.0;
  std::vector<double> w_grid, h_grid;
  Eigen::VectorXd X;           // X(w, z0) per w
  Eigen::VectorXd dY;          // Y(z0 + sqrt2 h) - Y(z0) per h
  Eigen::MatrixXd increments;  // (w index, h index) -> du1
};

// The derivation holds for small h; h is restricted to h <= min(z0, 1)/2.
CharLineSample sample_char_line(double z0, double t0, const std::vector<double>& w_grid,
                                const std::vector<double>& h_grid, double a,
                                const SeedSpec& seed);

// Y sampled on an increasing z grid via independent Gaussian increments with
// Var(Y(z') - Y(z)) = c0_scale(t0, a) * (z' - z); Y(0) = 0.
FieldSample sample_Y_path(const std::vector<double>& z_grid, double t0, double a,
                          const SeedSpec& seed, StreamId stream = StreamId::YPath);

}  // namespace kglab
