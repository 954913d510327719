#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "kglab/model.hpp"
#include "kglab/rng.hpp"

namespace kglab {

// Normalizers of the two path-regularity statements. Both require h < e^{-e}
// so that log log(1/h) is positive.
double lil_norm(double h);
double mc_norm(double h);

struct IncrementStatistic {
  double h = 0.0;
  CharCoords location{};
  double numerator = 0.0;  // |du| along the (+h,+h) characteristic direction
  double lil_normalizer = 0.0, mc_normalizer = 0.0;
  double ratio_lil = 0.0, ratio_mc = 0.0;
};

IncrementStatistic make_increment_statistic(double numerator, double h, const CharCoords& loc);

// Per-scale summary across replicas. running (when set) holds per-replica
// traces, one row per replica, one column per scale.
struct TraceSummary {
  std::vector<int> n_values;
  std::vector<double> median, q25, q75;
  Eigen::MatrixXd per_replica;
};

// Running max over dyadic scales h = 2^{-n} of |du|/lil_norm at a fixed
// characteristic point, sampled exactly; medians/IQR across replicas.
struct LilConfig {
  CharCoords point{1.0, 1.0};
  int n_lo = 8, n_hi = 20;
  std::size_t replicas = 400;
};

TraceSummary lil_experiment(const LilConfig& cfg, const ModelParams& params,
                            std::uint64_t master_seed);

// The identical running-max pipeline fed by increments of a standard Brownian
// motion (nested dyadic refinement), for calibration of trend acceptance.
TraceSummary lil_experiment_brownian(int n_lo, int n_hi, std::size_t replicas,
                                     std::uint64_t master_seed);

enum class McSource { Field, YPath, Brownian };

// sup over a z-grid in J of |du|/mc_norm per scale. Field: exact field
// increments along the characteristic at w0. YPath: the early-time boundary
// process Y with its sqrt2 h lag. Brownian: standard BM with lag h.
// z_lo == z_hi degenerates to a single-point "interval" (sup = the point's
// increment statistic).
struct McConfig {
  double z_lo = 1.0, z_hi = 1.0 + 0.03125;
  double w0 = 1.0;
  int n_lo = 12, n_hi = 16;
  std::size_t replicas = 100;
  McSource source = McSource::YPath;
  std::size_t grid_points = 0;  // 0: auto, two points per finest h
};

struct McResult {
  std::vector<int> n_values;
  std::vector<double> median_sup, q25, q75;
  Eigen::MatrixXd per_replica;  // sup statistic, replicas x scales
};

McResult mc_experiment(const McConfig& cfg, const ModelParams& params, std::uint64_t master_seed);

// sup over a w-grid of |du(w, z0)|/lil_norm per scale: the simultaneous
// boundedness statistic. The grid is canonicalized (sorted, deduplicated), so
// the result is invariant under permutation of w_grid; a single-element grid
// reduces to the fixed-point statistic.
struct SimLilConfig {
  double z0 = 1.0;
  std::vector<double> w_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  int n_lo = 12, n_hi = 20;
  std::size_t replicas = 200;
};

struct SimLilResult {
  std::vector<int> n_values;
  std::vector<double> median_sup;
  Eigen::MatrixXd per_replica;
  double growth_ratio = 0.0;  // max over n of median_sup / median_sup at n_lo
  bool bounded = false;       // growth_ratio <= 2
};

SimLilResult sim_lil_bound(const SimLilConfig& cfg, const ModelParams& params,
                           std::uint64_t master_seed);

// Scale-n* argmax scan of the Y-increment LIL statistic over a z-grid. Only
// the early-time boundary process enters: the located point is measurable
// with respect to the noise before t0.
struct ScanConfig {
  double z_lo = 0.05;
  double z_hi = 0.05 + kSqrt2 / 7.0;
  double w0 = 2.0;
  int n_star = 16;
  int n_trace_lo = 10;
  std::size_t null_runs = 200;
};

struct ScanResult {
  double z_lo = 0.0, z_hi = 0.0, w0 = 0.0, t0 = 0.0, c0 = 0.0;
  int n_star = 0;
  bool degenerate = false;  // t0 = 0: Y vanishes identically
  double Z_hat = 0.0;
  double statistic = 0.0;    // |dY| / lil_norm at Z_hat, scale 2^{-n_star}
  double dY_at_Zhat = 0.0;   // the realized increment, reused by propagation
  std::vector<int> trace_n;
  std::vector<double> trace_max;
  std::vector<double> null_sorted;  // fixed-z statistics, ascending
  double null_q95() const;
};

ScanResult singularity_scan(const ScanConfig& cfg, const ModelParams& params,
                            const SeedSpec& seed);

// Full-increment statistic at (w, Z_hat) for w beyond the scan line: the
// already-realized Y increment enters deterministically, X is freshly sampled
// jointly over the w values, and the post-t0 field contributes an independent
// increment with its exact second moment.
struct PropagationConfig {
  std::vector<double> w_offsets{0.05, 0.1, 0.2};
  std::size_t null_runs = 200;
  std::vector<int> fine_n{20, 22, 24};  // scales probing the X-term vanishing
};

struct PropagationResult {
  std::vector<double> w_values;
  std::vector<double> statistic;  // ratio_lil of the full increment per w
  std::vector<double> null_q95;
  std::vector<int> exceeded;      // statistic > null_q95, per w
  // max over w and fine_n of (X term) / (RMS of the Y term) in lil units
  double x_term_ratio_max = 0.0;
};

PropagationResult propagation_experiment(const ScanResult& scan, const PropagationConfig& cfg,
                                         const ModelParams& params, const SeedSpec& seed);

}  // namespace kglab
