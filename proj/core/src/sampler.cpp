#include "kglab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "kglab/covariance.hpp"
#include "kglab/errors.hpp"
#include "kglab/linalg.hpp"

namespace kglab {

GaussianDesign::GaussianDesign(std::vector<SpaceTimePoint> points, const ModelParams& params,
                               double tol)
    : points_(std::move(points)) {
  std::map<std::pair<double, double>, std::size_t> seen;
  std::vector<SpaceTimePoint> unique;
  slot_of_point_.reserve(points_.size());
  for (const auto& p : points_) {
    auto [it, inserted] = seen.try_emplace({p.t, p.x}, unique.size());
    if (inserted) unique.push_back(p);
    slot_of_point_.push_back(it->second);
  }

  cov_ = build_covariance(unique, params, tol).entries;

  std::vector<std::size_t> active;
  active_of_slot_.assign(unique.size(), -1);
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (cov_(Eigen::Index(i), Eigen::Index(i)) > 0.0) {
      active_of_slot_[i] = std::ptrdiff_t(active.size());
      active.push_back(i);
    }
  }
  if (!active.empty()) {
    Eigen::MatrixXd sub(active.size(), active.size());
    for (std::size_t r = 0; r < active.size(); ++r)
      for (std::size_t c = 0; c < active.size(); ++c)
        sub(Eigen::Index(r), Eigen::Index(c)) =
            cov_(Eigen::Index(active[r]), Eigen::Index(active[c]));
    factor_ = cholesky_with_jitter(sub);
  }
}

Eigen::VectorXd GaussianDesign::sample(const SeedSpec& seed, StreamId stream) const {
  GaussianStream rng(seed, stream);
  Eigen::VectorXd z(factor_.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  const Eigen::VectorXd active_values = factor_.rows() > 0
                                            ? Eigen::VectorXd(factor_ * z)
                                            : Eigen::VectorXd();
  Eigen::VectorXd out(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const std::ptrdiff_t row = active_of_slot_[slot_of_point_[i]];
    out[Eigen::Index(i)] = row >= 0 ? active_values[row] : 0.0;
  }
  return out;
}

FieldSample sample_exact(const std::vector<SpaceTimePoint>& points, const ModelParams& params,
                         const SeedSpec& seed, double tol) {
  GaussianDesign design(points, params, tol);
  FieldSample out;
  out.points = points;
  out.values = design.sample(seed, StreamId::ExactSampler);
  out.seed = seed;
  out.sampler = "exact";
  return out;
}

namespace {

void check_grid_args(double s_extent, double y_lo, double y_hi, double s_step, double y_step) {
  if (!(s_step > 0.0) || !(y_step > 0.0))
    throw std::invalid_argument("NoiseGrid: steps must be positive");
  if (!(s_extent > 0.0) || !(y_hi > y_lo))
    throw std::invalid_argument("NoiseGrid: empty domain");
}

}  // namespace

NoiseGrid NoiseGrid::generate(double s_extent, double y_lo, double y_hi, double s_step,
                              double y_step, const SeedSpec& seed, StreamId stream) {
  NoiseGrid g = zeros(s_extent, y_lo, y_hi, s_step, y_step);
  GaussianStream rng(seed, stream);
  const double scale = std::sqrt(s_step * y_step);
  for (Eigen::Index i = 0; i < g.cells.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cells.cols(); ++j) g.cells(i, j) = scale * rng.normal();
  return g;
}

NoiseGrid NoiseGrid::zeros(double s_extent, double y_lo, double y_hi, double s_step,
                           double y_step) {
  check_grid_args(s_extent, y_lo, y_hi, s_step, y_step);
  NoiseGrid g;
  g.s_step = s_step;
  g.y_step = y_step;
  g.y0 = y_lo;
  const auto rows = Eigen::Index(std::ceil(s_extent / s_step - 1e-9));
  const auto cols = Eigen::Index(std::ceil((y_hi - y_lo) / y_step - 1e-9));
  g.cells = Eigen::MatrixXd::Zero(rows, cols);
  return g;
}

NoiseGrid NoiseGrid::coarsen() const {
  if (cells.rows() % 2 != 0 || cells.cols() % 2 != 0)
    throw std::invalid_argument("NoiseGrid::coarsen: dimensions must be even");
  NoiseGrid g;
  g.s_step = 2.0 * s_step;
  g.y_step = 2.0 * y_step;
  g.y0 = y0;
  g.cells.resize(cells.rows() / 2, cells.cols() / 2);
  for (Eigen::Index i = 0; i < g.cells.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cells.cols(); ++j)
      g.cells(i, j) = cells(2 * i, 2 * j) + cells(2 * i + 1, 2 * j) + cells(2 * i, 2 * j + 1) +
                      cells(2 * i + 1, 2 * j + 1);
  return g;
}

WalshEvaluator::WalshEvaluator(const NoiseGrid& noise, double a) : noise_(&noise), a_(a) {
  prefix_.resize(noise.cells.rows(), noise.cells.cols() + 1);
  for (Eigen::Index i = 0; i < noise.cells.rows(); ++i) {
    prefix_(i, 0) = 0.0;
    for (Eigen::Index j = 0; j < noise.cells.cols(); ++j)
      prefix_(i, j + 1) = prefix_(i, j) + noise.cells(i, j);
  }
}

double WalshEvaluator::value_at(double t, double x) const {
  const NoiseGrid& g = *noise_;
  if (t < 0.0) throw CoverageError("walsh evaluation at negative time");
  if (t == 0.0) return 0.0;
  if (t > g.s_extent() + 1e-12 || x - t < g.y0 - 1e-12 || x + t > g.y_end() + 1e-12)
    throw CoverageError("light cone of the requested point exits the noise grid");
  const Eigen::Index ny = g.cells.cols();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < g.cells.rows(); ++i) {
    const double sigma = t - (double(i) + 0.5) * g.s_step;
    if (sigma <= 0.0) break;
    // cells whose center lies strictly inside (x - sigma, x + sigma)
    auto lo = Eigen::Index(std::floor((x - sigma - g.y0) / g.y_step - 0.5)) + 1;
    auto hi = Eigen::Index(std::ceil((x + sigma - g.y0) / g.y_step - 0.5)) - 1;
    lo = std::max(lo, Eigen::Index(0));
    hi = std::min(hi, ny - 1);
    if (hi < lo) continue;
    acc += 0.5 * std::exp(-0.5 * a_ * sigma) * (prefix_(i, hi + 1) - prefix_(i, lo));
  }
  return acc;
}

FieldSample walsh_on_noise(const std::vector<SpaceTimePoint>& outputs, const NoiseGrid& noise,
                           double a) {
  WalshEvaluator eval(noise, a);
  FieldSample out;
  out.points = outputs;
  out.values.resize(Eigen::Index(outputs.size()));
  for (std::size_t k = 0; k < outputs.size(); ++k)
    out.values[Eigen::Index(k)] = eval.value_at(outputs[k].t, outputs[k].x);
  out.sampler = "walsh";
  return out;
}

FieldSample sample_grid_walsh(const WalshGridSpec& spec, double a, const SeedSpec& seed) {
  const NoiseGrid noise =
      NoiseGrid::generate(spec.s_extent, spec.y_lo, spec.y_hi, spec.s_step, spec.y_step, seed);
  FieldSample out = walsh_on_noise(spec.outputs, noise, a);
  out.seed = seed;
  return out;
}

CharLineSample sample_char_line(double z0, double t0, const std::vector<double>& w_grid,
                                const std::vector<double>& h_grid, double a,
                                const SeedSpec& seed) {
  if (!(z0 > 0.0)) throw std::invalid_argument("sample_char_line: z0 must be positive");
  if (t0 < 0.0) throw std::invalid_argument("sample_char_line: t0 must be non-negative");
  if (w_grid.empty() || h_grid.empty())
    throw std::invalid_argument("sample_char_line: empty w_grid or h_grid");
  const double h_max = 0.5 * std::min(z0, 1.0);
  for (double h : h_grid)
    if (!(h > 0.0) || h > h_max)
      throw std::invalid_argument("sample_char_line: h_grid must lie in (0, min(z0,1)/2]");

  CharLineSample out;
  out.z0 = z0;
  out.t0 = t0;
  out.a = a;
  out.w_grid = w_grid;
  out.h_grid = h_grid;
  const auto nw = Eigen::Index(w_grid.size());
  const auto nh = Eigen::Index(h_grid.size());
  out.X = Eigen::VectorXd::Zero(nw);
  out.dY = Eigen::VectorXd::Zero(nh);
  out.increments = Eigen::MatrixXd::Zero(nw, nh);

  const double c0 = c0_scale(t0, a);
  if (c0 > 0.0) {
    Eigen::MatrixXd gram(nw, nw);
    for (Eigen::Index i = 0; i < nw; ++i)
      for (Eigen::Index j = 0; j < nw; ++j)
        gram(i, j) = cov_X({w_grid[std::size_t(i)], z0}, {w_grid[std::size_t(j)], z0}, t0, a);
    GaussianStream xrng(seed, StreamId::XField);
    Eigen::VectorXd zx(nw);
    for (Eigen::Index i = 0; i < nw; ++i) zx[i] = xrng.normal();
    out.X = cholesky_with_jitter(gram) * zx;

    // Y increments beyond z0, nested over the sorted h grid.
    std::vector<std::size_t> order(h_grid.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](std::size_t l, std::size_t r) { return h_grid[l] < h_grid[r]; });
    GaussianStream yrng(seed, StreamId::YPath);
    double level = 0.0, prev_h = 0.0;
    for (std::size_t k : order) {
      const double dz = kSqrt2 * (h_grid[k] - prev_h);
      level += std::sqrt(c0 * dz) * yrng.normal();
      out.dY[Eigen::Index(k)] = level;
      prev_h = h_grid[k];
    }
  }

  for (Eigen::Index i = 0; i < nw; ++i) {
    const double pref = std::exp(-a * (w_grid[std::size_t(i)] + z0) / (2.0 * kSqrt2));
    for (Eigen::Index k = 0; k < nh; ++k) {
      const double eh = std::exp(-0.5 * a * h_grid[std::size_t(k)]);
      out.increments(i, k) = pref * (0.5 * (eh - 1.0) * out.X[i] + 0.5 * eh * out.dY[k]);
    }
  }
  return out;
}

FieldSample sample_Y_path(const std::vector<double>& z_grid, double t0, double a,
                          const SeedSpec& seed, StreamId stream) {
  for (std::size_t k = 0; k < z_grid.size(); ++k) {
    if (z_grid[k] < 0.0) throw std::invalid_argument("sample_Y_path: z_grid must be >= 0");
    if (k > 0 && !(z_grid[k] > z_grid[k - 1]))
      throw std::invalid_argument("sample_Y_path: z_grid must be strictly increasing");
  }
  const double c0 = c0_scale(t0, a);
  GaussianStream rng(seed, stream);
  FieldSample out;
  out.seed = seed;
  out.sampler = "y_path";
  out.points.reserve(z_grid.size());
  out.values.resize(Eigen::Index(z_grid.size()));
  double level = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < z_grid.size(); ++k) {
    const double dz = z_grid[k] - prev;
    if (dz > 0.0 && c0 > 0.0) level += std::sqrt(c0 * dz) * rng.normal();
    prev = z_grid[k];
    out.points.push_back({z_grid[k], 0.0});
    out.values[Eigen::Index(k)] = level;
  }
  return out;
}

}  // namespace kglab
