#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "kglab/covariance.hpp"
#include "kglab/model.hpp"
#include "kglab/regularity.hpp"
#include "kglab/sampler.hpp"

using namespace kglab;

TEST_CASE("normalizers: pinned values and domain guard") {
  const double h = std::ldexp(1.0, -12);
  const double l = std::log(1.0 / h);
  CHECK(lil_norm(h) == doctest::Approx(std::sqrt(h * std::log(l))).epsilon(1e-15));
  CHECK(mc_norm(h) == doctest::Approx(std::sqrt(h * l)).epsilon(1e-15));
  CHECK(mc_norm(h) > lil_norm(h));  // log beats log log
  CHECK_THROWS_AS((void)lil_norm(0.5), std::domain_error);
  CHECK_THROWS_AS((void)mc_norm(0.5), std::domain_error);
}

TEST_CASE("pointwise trace: running max is monotone, first scale matches moments") {
  const ModelParams p(1.0, 0.5, 4.0);
  LilConfig cfg;
  cfg.point = {1.0, 1.0};
  cfg.n_lo = 8;
  cfg.n_hi = 12;
  cfg.replicas = 300;
  const TraceSummary res = lil_experiment(cfg, p, 13579);
  REQUIRE(res.n_values.size() == 5);
  REQUIRE(res.per_replica.rows() == 300);
  for (Eigen::Index r = 0; r < res.per_replica.rows(); ++r)
    for (Eigen::Index k = 1; k < res.per_replica.cols(); ++k)
      CHECK(res.per_replica(r, k) >= res.per_replica(r, k - 1));
  for (std::size_t k = 0; k < res.n_values.size(); ++k) {
    CHECK(res.q25[k] <= res.median[k]);
    CHECK(res.median[k] <= res.q75[k]);
  }
  // at the first scale the running max IS the ratio; its numerator second
  // moment must match the covariance-side increment moment
  const double h = std::ldexp(1.0, -cfg.n_lo);
  const double norm = lil_norm(h);
  double sq = 0.0;
  for (Eigen::Index r = 0; r < res.per_replica.rows(); ++r) {
    const double num = res.per_replica(r, 0) * norm;
    sq += num * num;
  }
  const SpaceTimePoint a = CharCoords{1.0, 1.0}.to_spacetime();
  const SpaceTimePoint b = CharCoords{1.0, 1.0 + kSqrt2 * h}.to_spacetime();
  const double im = increment_moment(a, b, p);
  CHECK(std::abs(sq / 300.0 / im - 1.0) <= 4.0 * std::sqrt(2.0 / 300.0));
}

TEST_CASE("brownian pointwise trace stabilizes near its known level") {
  const TraceSummary bm = lil_experiment_brownian(8, 20, 400, 902);
  for (std::size_t k = 1; k < bm.median.size(); ++k) CHECK(bm.median[k] >= bm.median[k - 1]);
  CHECK(bm.median.back() >= 0.9);
  CHECK(bm.median.back() <= 1.4);
  const TraceSummary again = lil_experiment_brownian(8, 20, 400, 902);
  CHECK((bm.per_replica - again.per_replica).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("interval statistic on a degenerate interval decays with scale") {
  McConfig cfg;
  cfg.z_lo = cfg.z_hi = 0.7;
  cfg.w0 = 1.0;
  cfg.n_lo = 12;
  cfg.n_hi = 20;
  cfg.replicas = 400;
  cfg.source = McSource::YPath;
  const McResult res = mc_experiment(cfg, ModelParams(1.0, 0.5, 4.0), 606);
  REQUIRE(res.median_sup.size() == 9);
  const double trend = res.median_sup.back() / res.median_sup.front();
  CHECK(trend <= 0.9);  // single-point sup in mc units shrinks like 1/sqrt(n)
  CHECK(trend >= 0.4);
}

TEST_CASE("interval sup statistic is monotone under interval inclusion") {
  const ModelParams p(1.0, 0.5, 4.0);
  const double w0 = 1.0, z_lo = 1.0, width = std::ldexp(1.0, -4);
  const int nb = 17;
  const double lag = kSqrt2 * std::ldexp(1.0, -10);
  std::vector<SpaceTimePoint> pts;
  for (int j = 0; j < nb; ++j)
    pts.push_back(CharCoords{w0, z_lo + width * double(j) / (nb - 1)}.to_spacetime());
  for (int j = 0; j < nb; ++j)
    pts.push_back(CharCoords{w0, z_lo + width * double(j) / (nb - 1) + lag}.to_spacetime());
  const GaussianDesign design(pts, p);
  const double norm = mc_norm(std::ldexp(1.0, -10));
  for (std::uint64_t r = 0; r < 20; ++r) {
    const Eigen::VectorXd v = design.sample({343434, r});
    double sub = 0.0, full = 0.0;
    for (int j = 0; j < nb; ++j) {
      const double ratio = std::abs(v[nb + j] - v[j]) / norm;
      if (j < 9) sub = std::max(sub, ratio);  // first half: the sub-interval
      full = std::max(full, ratio);
    }
    CHECK(sub <= full);
  }
}

TEST_CASE("simultaneous trace: canonical grid ordering and derived summary") {
  SimLilConfig cfg;
  cfg.z0 = 0.8;
  cfg.w_grid = {0.5, 1.0, 0.25};
  cfg.n_lo = 10;
  cfg.n_hi = 14;
  cfg.replicas = 150;
  const ModelParams p(1.0, 0.5, 4.0);
  const SimLilResult a = sim_lil_bound(cfg, p, 1515);
  SimLilConfig shuffled = cfg;
  shuffled.w_grid = {0.25, 0.5, 1.0, 0.5};  // permuted with a duplicate
  const SimLilResult b = sim_lil_bound(shuffled, p, 1515);
  CHECK((a.per_replica - b.per_replica).cwiseAbs().maxCoeff() == 0.0);

  const double top = *std::max_element(a.median_sup.begin(), a.median_sup.end());
  CHECK(a.growth_ratio == doctest::Approx(top / a.median_sup.front()).epsilon(1e-15));
  CHECK(a.bounded == (a.growth_ratio <= 2.0));

  CHECK_THROWS(sim_lil_bound(SimLilConfig{0.8, {}, 10, 14, 150}, p, 1));
}

TEST_CASE("simultaneous trace at one location matches the increment moment") {
  SimLilConfig cfg;
  cfg.z0 = 1.0;
  cfg.w_grid = {1.0};
  cfg.n_lo = 8;
  cfg.n_hi = 8;
  cfg.replicas = 300;
  const ModelParams p(1.0, 0.5, 4.0);
  const SimLilResult res = sim_lil_bound(cfg, p, 2750);
  const double h = std::ldexp(1.0, -8);
  const double norm = lil_norm(h);
  double sq = 0.0;
  for (Eigen::Index r = 0; r < res.per_replica.rows(); ++r) {
    const double num = res.per_replica(r, 0) * norm;
    sq += num * num;
  }
  const SpaceTimePoint u = CharCoords{1.0, 1.0}.to_spacetime();
  const SpaceTimePoint v = CharCoords{1.0, 1.0 + kSqrt2 * h}.to_spacetime();
  CHECK(std::abs(sq / 300.0 / increment_moment(u, v, p) - 1.0) <= 4.0 * std::sqrt(2.0 / 300.0));
}

TEST_CASE("scan: located statistic, reported grid, reproducibility") {
  ScanConfig cfg;
  cfg.z_lo = 0.05;
  cfg.z_hi = 0.05 + kSqrt2 / 7.0;
  cfg.w0 = 3.0;
  cfg.n_star = 12;
  cfg.n_trace_lo = 10;
  cfg.null_runs = 60;
  const ModelParams p(0.25, 0.125, 4.0);
  const ScanResult s = singularity_scan(cfg, p, {909, 1});
  CHECK_FALSE(s.degenerate);
  CHECK(s.trace_n == std::vector<int>{10, 11, 12});
  CHECK(s.statistic == s.trace_max.back());
  CHECK(s.Z_hat >= cfg.z_lo);
  CHECK(s.Z_hat <= cfg.z_hi);
  REQUIRE(s.null_sorted.size() == 60);
  CHECK(std::is_sorted(s.null_sorted.begin(), s.null_sorted.end()));
  CHECK(s.null_q95() >= s.null_sorted.front());
  CHECK(s.null_q95() <= s.null_sorted.back());
  const ScanResult again = singularity_scan(cfg, p, {909, 1});
  CHECK(again.statistic == s.statistic);
  CHECK(again.Z_hat == s.Z_hat);
  CHECK(again.null_sorted == s.null_sorted);

  ScanConfig flat = cfg;
  flat.w0 = 0.0;  // zero-length history: no signal to scan
  const ScanResult degenerate = singularity_scan(flat, p, {909, 1});
  CHECK(degenerate.degenerate);

  ScanConfig bad = cfg;
  bad.z_hi = bad.z_lo;
  CHECK_THROWS_AS((void)singularity_scan(bad, p, {909, 1}), std::invalid_argument);
}

TEST_CASE("propagation: internal consistency and vanishing cross term") {
  ScanConfig cfg;
  cfg.z_lo = 0.05;
  cfg.z_hi = 0.05 + kSqrt2 / 7.0;
  cfg.w0 = 3.0;
  cfg.n_star = 12;
  cfg.n_trace_lo = 10;
  cfg.null_runs = 60;
  const ModelParams p(0.25, 0.125, 4.0);
  const ScanResult s = singularity_scan(cfg, p, {909, 0});

  PropagationConfig pc;
  pc.w_offsets = {0.1, 0.2};
  pc.null_runs = 40;
  pc.fine_n = {14};
  const PropagationResult coarse = propagation_experiment(s, pc, p, {909, 0});
  REQUIRE(coarse.w_values.size() == 2);
  for (std::size_t j = 0; j < coarse.w_values.size(); ++j) {
    CHECK(coarse.w_values[j] > cfg.w0);
    CHECK(coarse.exceeded[j] == (coarse.statistic[j] > coarse.null_q95[j]));
  }
  const PropagationResult rerun = propagation_experiment(s, pc, p, {909, 0});
  CHECK(rerun.statistic == coarse.statistic);
  CHECK(rerun.x_term_ratio_max == coarse.x_term_ratio_max);

  pc.fine_n = {20};
  const PropagationResult fine = propagation_experiment(s, pc, p, {909, 0});
  CHECK(fine.x_term_ratio_max <= 0.5 * coarse.x_term_ratio_max);
  CHECK(fine.x_term_ratio_max < 1e-2);

  ScanConfig flat = cfg;
  flat.w0 = 0.0;
  const ScanResult degenerate = singularity_scan(flat, p, {909, 0});
  CHECK_THROWS_AS((void)propagation_experiment(degenerate, pc, p, {909, 0}),
                  std::invalid_argument);
}

TEST_CASE("experiment configs validate their inputs") {
  const ModelParams p(1.0, 0.5, 4.0);
  McConfig mc;
  mc.z_lo = -0.1;
  mc.z_hi = 0.5;
  CHECK_THROWS_AS((void)mc_experiment(mc, p, 1), std::invalid_argument);
  McConfig none;
  none.replicas = 0;
  CHECK_THROWS_AS((void)mc_experiment(none, p, 1), std::invalid_argument);
}
