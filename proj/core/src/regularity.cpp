#include "kglab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "kglab/covariance.hpp"
#include "kglab/linalg.hpp"
#include "kglab/sampler.hpp"
#include "kglab/stats.hpp"

namespace kglab {
namespace {

void require_small_h(double h) {
  // Both normalizers want log log(1/h) comfortably positive.
  if (!(h > 0.0 && h < std::exp(-std::exp(1.0))))
    throw std::domain_error("regularity normalizer needs 0 < h < e^{-e}");
}

std::vector<int> scale_list(int n_lo, int n_hi) {
  if (n_lo < 1 || n_hi < n_lo)
    throw std::invalid_argument("scale range must satisfy 1 <= n_lo <= n_hi");
  require_small_h(std::ldexp(1.0, -n_lo));
  std::vector<int> n;
  for (int k = n_lo; k <= n_hi; ++k) n.push_back(k);
  return n;
}

std::vector<double> matrix_column(const Eigen::MatrixXd& m, Eigen::Index j) {
  std::vector<double> col(std::size_t(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) col[std::size_t(r)] = m(r, j);
  return col;
}

struct Quartiles {
  std::vector<double> med, lo, hi;
};

Quartiles column_quartiles(const Eigen::MatrixXd& m) {
  Quartiles q;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    auto col = matrix_column(m, j);
    q.med.push_back(median(col));
    q.lo.push_back(quantile(col, 0.25));
    q.hi.push_back(quantile(col, 0.75));
  }
  return q;
}

// Sorted-unique view of a query set plus a map from each query to its slot.
// Exact duplicates collapse; close-but-distinct values stay distinct, which a
// level walk treats as a near-zero increment.
struct QueryGrid {
  std::vector<double> sorted;
  std::vector<std::size_t> slot;

  explicit QueryGrid(const std::vector<double>& queries) {
    sorted = queries;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    slot.resize(queries.size());
    for (std::size_t k = 0; k < queries.size(); ++k)
      slot[k] = std::size_t(std::lower_bound(sorted.begin(), sorted.end(), queries[k]) -
                            sorted.begin());
  }
};

Eigen::VectorXd brownian_levels(const std::vector<double>& sorted_t, const SeedSpec& seed) {
  GaussianStream rng(seed, StreamId::BrownianOracle);
  Eigen::VectorXd out(Eigen::Index(sorted_t.size()));
  double level = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < sorted_t.size(); ++k) {
    const double dt = sorted_t[k] - prev;
    if (dt > 0.0) level += std::sqrt(dt) * rng.normal();
    prev = sorted_t[k];
    out[Eigen::Index(k)] = level;
  }
  return out;
}

}  // namespace

double lil_norm(double h) {
  require_small_h(h);
  return std::sqrt(h * std::log(std::log(1.0 / h)));
}

double mc_norm(double h) {
  require_small_h(h);
  return std::sqrt(h * std::log(1.0 / h));
}

IncrementStatistic make_increment_statistic(double numerator, double h, const CharCoords& loc) {
  IncrementStatistic s;
  s.h = h;
  s.location = loc;
  s.numerator = numerator;
  s.lil_normalizer = lil_norm(h);
  s.mc_normalizer = mc_norm(h);
  s.ratio_lil = std::abs(numerator) / s.lil_normalizer;
  s.ratio_mc = std::abs(numerator) / s.mc_normalizer;
  return s;
}

TraceSummary lil_experiment(const LilConfig& cfg, const ModelParams& params,
                            std::uint64_t master_seed) {
  if (!(cfg.point.w >= 0.0 && cfg.point.z >= 0.0))
    throw std::invalid_argument("lil_experiment: point must lie in the closed first quadrant");
  if (cfg.replicas == 0) throw std::invalid_argument("lil_experiment: replicas must be positive");
  const auto n_values = scale_list(cfg.n_lo, cfg.n_hi);

  std::vector<SpaceTimePoint> pts;
  pts.push_back(cfg.point.to_spacetime());
  for (int n : n_values)
    pts.push_back(CharCoords{cfg.point.w, cfg.point.z + kSqrt2 * std::ldexp(1.0, -n)}
                      .to_spacetime());
  const GaussianDesign design(pts, params);

  Eigen::MatrixXd M(Eigen::Index(cfg.replicas), Eigen::Index(n_values.size()));
  for (std::size_t r = 0; r < cfg.replicas; ++r) {
    const Eigen::VectorXd v = design.sample({master_seed, r});
    double running = 0.0;
    for (std::size_t k = 0; k < n_values.size(); ++k) {
      const double h = std::ldexp(1.0, -n_values[k]);
      running = std::max(running, std::abs(v[Eigen::Index(k + 1)] - v[0]) / lil_norm(h));
      M(Eigen::Index(r), Eigen::Index(k)) = running;
    }
  }

  TraceSummary out;
  out.n_values = n_values;
  out.per_replica = std::move(M);
  auto q = column_quartiles(out.per_replica);
  out.median = std::move(q.med);
  out.q25 = std::move(q.lo);
  out.q75 = std::move(q.hi);
  return out;
}

TraceSummary lil_experiment_brownian(int n_lo, int n_hi, std::size_t replicas,
                                     std::uint64_t master_seed) {
  if (replicas == 0) throw std::invalid_argument("lil_experiment_brownian: replicas must be positive");
  const auto n_values = scale_list(n_lo, n_hi);

  Eigen::MatrixXd M(Eigen::Index(replicas), Eigen::Index(n_values.size()));
  for (std::size_t r = 0; r < replicas; ++r) {
    GaussianStream rng({master_seed, r}, StreamId::BrownianOracle);
    double d = 0.0, running = 0.0;
    for (std::size_t k = 0; k < n_values.size(); ++k) {
      const int n = n_values[k];
      if (k == 0)
        d = std::sqrt(std::ldexp(1.0, -n)) * rng.normal();
      else
        // bridge midpoint: halve the previous increment, add independent noise
        d = 0.5 * d + std::sqrt(0.25 * std::ldexp(1.0, -(n - 1))) * rng.normal();
      running = std::max(running, std::abs(d) / lil_norm(std::ldexp(1.0, -n)));
      M(Eigen::Index(r), Eigen::Index(k)) = running;
    }
  }

  TraceSummary out;
  out.n_values = n_values;
  out.per_replica = std::move(M);
  auto q = column_quartiles(out.per_replica);
  out.median = std::move(q.med);
  out.q25 = std::move(q.lo);
  out.q75 = std::move(q.hi);
  return out;
}

McResult mc_experiment(const McConfig& cfg, const ModelParams& params, std::uint64_t master_seed) {
  if (!(cfg.z_hi >= cfg.z_lo && cfg.z_lo >= 0.0))
    throw std::invalid_argument("mc_experiment: need 0 <= z_lo <= z_hi");
  if (cfg.w0 < 0.0) throw std::invalid_argument("mc_experiment: w0 must be >= 0");
  if (cfg.replicas == 0) throw std::invalid_argument("mc_experiment: replicas must be positive");
  const auto n_values = scale_list(cfg.n_lo, cfg.n_hi);

  std::size_t base_count = cfg.grid_points;
  if (cfg.z_hi == cfg.z_lo) {
    base_count = 1;
  } else if (base_count == 0) {
    const double h_finest = std::ldexp(1.0, -cfg.n_hi);
    base_count = std::size_t(std::ceil((cfg.z_hi - cfg.z_lo) / (0.5 * h_finest))) + 1;
    if (cfg.source == McSource::Field) base_count = std::min<std::size_t>(base_count, 33);
  }
  if (base_count < 1) throw std::invalid_argument("mc_experiment: need at least one grid point");

  std::vector<double> base(base_count);
  for (std::size_t j = 0; j < base_count; ++j)
    base[j] = base_count == 1 ? cfg.z_lo
                              : cfg.z_lo + (cfg.z_hi - cfg.z_lo) * double(j) / double(base_count - 1);

  const double lag_mult = cfg.source == McSource::Brownian ? 1.0 : kSqrt2;
  Eigen::MatrixXd M(Eigen::Index(cfg.replicas), Eigen::Index(n_values.size()));

  if (cfg.source == McSource::Field) {
    std::vector<SpaceTimePoint> pts;
    pts.reserve(base_count * (1 + n_values.size()));
    for (double z : base) pts.push_back(CharCoords{cfg.w0, z}.to_spacetime());
    for (int n : n_values) {
      const double lag = lag_mult * std::ldexp(1.0, -n);
      for (double z : base) pts.push_back(CharCoords{cfg.w0, z + lag}.to_spacetime());
    }
    const GaussianDesign design(pts, params);
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
      const Eigen::VectorXd v = design.sample({master_seed, r});
      for (std::size_t k = 0; k < n_values.size(); ++k) {
        const double norm = mc_norm(std::ldexp(1.0, -n_values[k]));
        double sup = 0.0;
        for (std::size_t j = 0; j < base_count; ++j)
          sup = std::max(sup, std::abs(v[Eigen::Index((1 + k) * base_count + j)] -
                                       v[Eigen::Index(j)]) /
                                  norm);
        M(Eigen::Index(r), Eigen::Index(k)) = sup;
      }
    }
  } else {
    std::vector<double> queries = base;
    queries.reserve(base_count * (1 + n_values.size()));
    for (int n : n_values) {
      const double lag = lag_mult * std::ldexp(1.0, -n);
      for (double z : base) queries.push_back(z + lag);
    }
    const QueryGrid qg(queries);
    const double t0 = cfg.w0 / kSqrt2;
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
      const SeedSpec seed{master_seed, r};
      const Eigen::VectorXd L =
          cfg.source == McSource::YPath
              ? sample_Y_path(qg.sorted, t0, params.a, seed, StreamId::YPath).values
              : brownian_levels(qg.sorted, seed);
      for (std::size_t k = 0; k < n_values.size(); ++k) {
        const double norm = mc_norm(std::ldexp(1.0, -n_values[k]));
        double sup = 0.0;
        for (std::size_t j = 0; j < base_count; ++j) {
          const double d = L[Eigen::Index(qg.slot[(1 + k) * base_count + j])] -
                           L[Eigen::Index(qg.slot[j])];
          sup = std::max(sup, std::abs(d) / norm);
        }
        M(Eigen::Index(r), Eigen::Index(k)) = sup;
      }
    }
  }

  McResult out;
  out.n_values = n_values;
  out.per_replica = std::move(M);
  auto q = column_quartiles(out.per_replica);
  out.median_sup = std::move(q.med);
  out.q25 = std::move(q.lo);
  out.q75 = std::move(q.hi);
  return out;
}

SimLilResult sim_lil_bound(const SimLilConfig& cfg, const ModelParams& params,
                           std::uint64_t master_seed) {
  if (!(cfg.z0 >= 0.0)) throw std::invalid_argument("sim_lil_bound: z0 must be >= 0");
  if (cfg.w_grid.empty()) throw std::invalid_argument("sim_lil_bound: w_grid must be non-empty");
  for (double wi : cfg.w_grid)
    if (!(wi >= 0.0)) throw std::invalid_argument("sim_lil_bound: w_grid entries must be >= 0");
  if (cfg.replicas == 0) throw std::invalid_argument("sim_lil_bound: replicas must be positive");
  const auto n_values = scale_list(cfg.n_lo, cfg.n_hi);

  std::vector<double> w = cfg.w_grid;  // canonical order: permutation-invariant results
  std::sort(w.begin(), w.end());
  w.erase(std::unique(w.begin(), w.end()), w.end());
  const std::size_t W = w.size();

  std::vector<SpaceTimePoint> pts;
  pts.reserve(W * (1 + n_values.size()));
  for (double wi : w) pts.push_back(CharCoords{wi, cfg.z0}.to_spacetime());
  for (int n : n_values) {
    const double lag = kSqrt2 * std::ldexp(1.0, -n);
    for (double wi : w) pts.push_back(CharCoords{wi, cfg.z0 + lag}.to_spacetime());
  }
  const GaussianDesign design(pts, params);

  Eigen::MatrixXd M(Eigen::Index(cfg.replicas), Eigen::Index(n_values.size()));
  for (std::size_t r = 0; r < cfg.replicas; ++r) {
    const Eigen::VectorXd v = design.sample({master_seed, r});
    for (std::size_t k = 0; k < n_values.size(); ++k) {
      const double norm = lil_norm(std::ldexp(1.0, -n_values[k]));
      double sup = 0.0;
      for (std::size_t i = 0; i < W; ++i)
        sup = std::max(sup,
                       std::abs(v[Eigen::Index((1 + k) * W + i)] - v[Eigen::Index(i)]) / norm);
      M(Eigen::Index(r), Eigen::Index(k)) = sup;
    }
  }

  SimLilResult out;
  out.n_values = n_values;
  out.per_replica = std::move(M);
  out.median_sup = column_quartiles(out.per_replica).med;
  const double first = out.median_sup.front();
  const double top = *std::max_element(out.median_sup.begin(), out.median_sup.end());
  if (first > 0.0)
    out.growth_ratio = top / first;
  else
    out.growth_ratio = top == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  out.bounded = out.growth_ratio <= 2.0;
  return out;
}

double ScanResult::null_q95() const { return quantile(null_sorted, 0.95); }

ScanResult singularity_scan(const ScanConfig& cfg, const ModelParams& params,
                            const SeedSpec& seed) {
  if (!(cfg.z_hi > cfg.z_lo && cfg.z_lo >= 0.0))
    throw std::invalid_argument("singularity_scan: need 0 <= z_lo < z_hi");
  if (cfg.w0 < 0.0) throw std::invalid_argument("singularity_scan: w0 must be >= 0");
  if (cfg.n_trace_lo < 1 || cfg.n_star < cfg.n_trace_lo)
    throw std::invalid_argument("singularity_scan: need 1 <= n_trace_lo <= n_star");
  if (cfg.null_runs == 0) throw std::invalid_argument("singularity_scan: null_runs must be positive");
  require_small_h(std::ldexp(1.0, -cfg.n_trace_lo));

  ScanResult out;
  out.z_lo = cfg.z_lo;
  out.z_hi = cfg.z_hi;
  out.w0 = cfg.w0;
  out.t0 = cfg.w0 / kSqrt2;
  out.c0 = c0_scale(out.t0, params.a);
  out.n_star = cfg.n_star;
  for (int n = cfg.n_trace_lo; n <= cfg.n_star; ++n) out.trace_n.push_back(n);

  const std::size_t J = std::size_t(1) << cfg.n_star;
  if (cfg.n_star > 20 || J * (out.trace_n.size() + 1) > (std::size_t(1) << 24))
    throw std::invalid_argument("singularity_scan: grid too large");
  const double delta = (cfg.z_hi - cfg.z_lo) / double(J);
  const double h_star = std::ldexp(1.0, -cfg.n_star);

  if (out.c0 == 0.0) {
    out.degenerate = true;
    out.Z_hat = cfg.z_lo;
    out.trace_max.assign(out.trace_n.size(), 0.0);
    out.null_sorted.assign(cfg.null_runs, 0.0);
    return out;
  }

  std::vector<double> base(J);
  for (std::size_t j = 0; j < J; ++j) base[j] = cfg.z_lo + delta * double(j);
  std::vector<double> queries = base;
  queries.reserve(J * (out.trace_n.size() + 1));
  for (int n : out.trace_n) {
    const double lag = kSqrt2 * std::ldexp(1.0, -n);
    for (std::size_t j = 0; j < J; ++j) queries.push_back(base[j] + lag);
  }
  const QueryGrid qg(queries);
  const Eigen::VectorXd L = sample_Y_path(qg.sorted, out.t0, params.a, seed, StreamId::YPath).values;

  out.trace_max.assign(out.trace_n.size(), 0.0);
  for (std::size_t k = 0; k < out.trace_n.size(); ++k) {
    const int n = out.trace_n[k];
    const double norm = lil_norm(std::ldexp(1.0, -n));
    std::size_t best = 0;
    double best_ratio = -1.0, best_incr = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const double d = L[Eigen::Index(qg.slot[(1 + k) * J + j])] - L[Eigen::Index(qg.slot[j])];
      const double ratio = std::abs(d) / norm;
      if (ratio > out.trace_max[k]) out.trace_max[k] = ratio;
      if (n == cfg.n_star && ratio > best_ratio) {
        best_ratio = ratio;
        best = j;
        best_incr = d;
      }
    }
    if (n == cfg.n_star) {
      out.Z_hat = base[best];
      out.statistic = best_ratio;
      out.dY_at_Zhat = best_incr;
    }
  }

  GaussianStream null_rng(seed, StreamId::NullCalibration);
  const double sd = std::sqrt(out.c0 * kSqrt2 * h_star);
  const double norm_star = lil_norm(h_star);
  out.null_sorted.resize(cfg.null_runs);
  for (std::size_t r = 0; r < cfg.null_runs; ++r)
    out.null_sorted[r] = std::abs(null_rng.normal()) * sd / norm_star;
  std::sort(out.null_sorted.begin(), out.null_sorted.end());
  return out;
}

PropagationResult propagation_experiment(const ScanResult& scan, const PropagationConfig& cfg,
                                         const ModelParams& params, const SeedSpec& seed) {
  if (scan.degenerate)
    throw std::invalid_argument("propagation_experiment: scan located no boundary signal");
  if (cfg.w_offsets.empty())
    throw std::invalid_argument("propagation_experiment: need at least one w offset");
  for (double off : cfg.w_offsets)
    if (!(off > 0.0)) throw std::invalid_argument("propagation_experiment: offsets must be positive");
  if (cfg.null_runs == 0)
    throw std::invalid_argument("propagation_experiment: null_runs must be positive");
  for (int n : cfg.fine_n)
    if (n < 1) throw std::invalid_argument("propagation_experiment: fine scales must be >= 1");

  const double Z = scan.Z_hat;
  const double hs = std::ldexp(1.0, -scan.n_star);
  const double eh = std::exp(-params.a * hs / 2.0);
  const double norm = lil_norm(hs);
  const std::size_t W = cfg.w_offsets.size();

  PropagationResult out;
  out.w_values.resize(W);
  for (std::size_t i = 0; i < W; ++i) out.w_values[i] = scan.w0 + cfg.w_offsets[i];

  Eigen::MatrixXd G(static_cast<Eigen::Index>(W), static_cast<Eigen::Index>(W));
  for (std::size_t i = 0; i < W; ++i)
    for (std::size_t j = 0; j < W; ++j)
      G(Eigen::Index(i), Eigen::Index(j)) =
          cov_X({out.w_values[i], Z}, {out.w_values[j], Z}, scan.t0, params.a);
  const Eigen::MatrixXd Lx = cholesky_with_jitter(G);
  GaussianStream x_rng(seed, StreamId::XField);
  Eigen::VectorXd nx(static_cast<Eigen::Index>(W));
  for (std::size_t i = 0; i < W; ++i) nx[Eigen::Index(i)] = x_rng.normal();
  const Eigen::VectorXd X = Lx * nx;

  GaussianStream u2_rng(seed, StreamId::USecond);
  GaussianStream null_rng(seed, StreamId::NullCalibration);
  // the scan's null ensemble shares this stream; step past what it consumed
  for (std::size_t k = 0; k < scan.null_sorted.size(); ++k) null_rng.normal();

  const double z_fix = 0.5 * (scan.z_lo + scan.z_hi);
  const double sd_y = std::sqrt(scan.c0 * kSqrt2 * hs);

  out.statistic.resize(W);
  out.null_q95.resize(W);
  out.exceeded.resize(W);
  out.x_term_ratio_max = 0.0;

  for (std::size_t i = 0; i < W; ++i) {
    const double w = out.w_values[i];
    const double pref = std::exp(-params.a * (w + Z) / (2.0 * kSqrt2));
    const double t = (w + Z) / kSqrt2, x = (Z - w) / kSqrt2;
    const double s2 = t - scan.t0;  // elapsed time of the post-boundary field
    const double var2 = increment_moment({s2 + hs, x + hs}, {s2, x}, params);
    const double du2 = std::sqrt(std::max(var2, 0.0)) * u2_rng.normal();
    out.statistic[i] =
        std::abs(pref * (0.5 * (eh - 1.0) * X[Eigen::Index(i)] + 0.5 * eh * scan.dY_at_Zhat) +
                 du2) /
        norm;

    const double pref_f = std::exp(-params.a * (w + z_fix) / (2.0 * kSqrt2));
    const double sd_xf = std::sqrt(std::max(cov_X({w, z_fix}, {w, z_fix}, scan.t0, params.a), 0.0));
    const double tf = (w + z_fix) / kSqrt2, xf = (z_fix - w) / kSqrt2;
    const double sd_u2f =
        std::sqrt(std::max(increment_moment({tf - scan.t0 + hs, xf + hs}, {tf - scan.t0, xf},
                                            params),
                           0.0));
    std::vector<double> nulls(cfg.null_runs);
    for (std::size_t r = 0; r < cfg.null_runs; ++r) {
      const double xn = sd_xf * null_rng.normal();
      const double yn = sd_y * null_rng.normal();
      const double un = sd_u2f * null_rng.normal();
      nulls[r] = std::abs(pref_f * (0.5 * (eh - 1.0) * xn + 0.5 * eh * yn) + un) / norm;
    }
    out.null_q95[i] = quantile(nulls, 0.95);
    out.exceeded[i] = out.statistic[i] > out.null_q95[i] ? 1 : 0;

    for (int nf : cfg.fine_n) {
      const double hf = std::ldexp(1.0, -nf);
      const double ehf = std::exp(-params.a * hf / 2.0);
      const double ratio = (0.5 * std::abs(ehf - 1.0) * std::abs(X[Eigen::Index(i)])) /
                           (0.5 * ehf * std::sqrt(scan.c0 * kSqrt2 * hf));
      out.x_term_ratio_max = std::max(out.x_term_ratio_max, ratio);
    }
  }
  return out;
}

}  // namespace kglab
