#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "kglab/covariance.hpp"
#include "kglab/model.hpp"
#include "kglab/reduction.hpp"
#include "kglab/sampler.hpp"
#include "oracles.hpp"

using namespace kglab;

namespace {

GridSpec make_spec(double step, double T, double x_lo, double x_hi) {
  return {step, std::size_t(std::lround(T / step)) + 1,
          std::size_t(std::lround((x_hi - x_lo) / step)) + 1, x_lo};
}

NoiseGrid noise_for(const GridSpec& gs, double T, const SeedSpec& seed) {
  const double x_hi = gs.x0 + double(gs.nx - 1) * gs.step;
  return NoiseGrid::generate(T, gs.x0 - T - gs.step, x_hi + T + gs.step, gs.step, gs.step, seed);
}

}  // namespace

TEST_CASE("cone integral of a constant field converges at second order") {
  const double a = 2.0;
  auto integrand = [&](double s) { return s * std::exp(-0.5 * a * s); };
  double worst[2];
  for (int k = 5; k <= 6; ++k) {
    const double step = std::ldexp(1.0, -k);
    const GridSpec gs = make_spec(step, 1.0, -2.0, 2.0);
    const GridField ones{gs.x0, step, step,
                         Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(gs.nt),
                                               static_cast<Eigen::Index>(gs.nx))};
    const GridField g = apply_cone_integral(ones, a);
    const Eigen::Index col = Eigen::Index(gs.nx - 1) / 2;
    double w = 0.0;
    for (int frac = 1; frac <= 4; ++frac) {
      const Eigen::Index row = Eigen::Index((gs.nt - 1) * std::size_t(frac) / 4);
      REQUIRE(g.trusted(row, col));
      const double exact = oracles::simpson(integrand, 0.0, g.t_at(row), 1e-14);
      w = std::max(w, std::abs(g.values(row, col) - exact) / exact);
    }
    worst[k - 5] = w;
  }
  CHECK(worst[0] <= 4e-3);
  CHECK(worst[1] <= 1e-3);
  CHECK(worst[0] / worst[1] >= 3.2);  // halving the step quarters the error
  CHECK(worst[0] / worst[1] <= 4.8);
}

TEST_CASE("stochastic convolution variance approaches the closed form") {
  const double a = 1.0, step = std::ldexp(1.0, -6);
  const GridSpec gs = make_spec(step, 1.0, -2.0, 2.0);
  const SpaceTimePoint probe{0.5, 0.0};
  const Eigen::Index row = Eigen::Index(std::lround(probe.t / step));
  const Eigen::Index col = Eigen::Index(gs.nx - 1) / 2;
  const std::size_t N = 2500;
  double sq = 0.0;
  for (std::size_t r = 0; r < N; ++r) {
    const GridField u = stochastic_convolution(noise_for(gs, 1.0, {7777, r}), a, gs);
    sq += u.values(row, col) * u.values(row, col);
  }
  CHECK(std::abs(sq / double(N) / cov_critical(probe, probe, a) - 1.0) <= 0.15);
}

TEST_CASE("critically coupled solve returns the convolution field in one sweep") {
  const ModelParams p(2.0, 1.0, 1.5);
  REQUIRE(regime(p) == Regime::Critical);
  const double step = std::ldexp(1.0, -5);
  const GridSpec gs = make_spec(step, p.T, -1.5, 1.5);
  const GridField uc = stochastic_convolution(noise_for(gs, p.T, {4141, 0}), p.a, gs);
  const PicardSolution sol = picard_solve(uc, p);
  CHECK(sol.report.iterations == 1);
  CHECK(sol.report.converged);
  CHECK((sol.u.values - uc.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fixed-point iteration contracts geometrically off criticality") {
  const ModelParams p(2.0, 1.2, 1.5);
  const double step = std::ldexp(1.0, -5);
  const GridSpec gs = make_spec(step, p.T, -1.5, 1.5);
  for (std::uint64_t r = 0; r < 3; ++r) {
    const GridField uc = stochastic_convolution(noise_for(gs, p.T, {2323, r}), p.a, gs);
    const PicardSolution sol = picard_solve(uc, p);
    CHECK(sol.report.converged);
    CHECK(sol.report.iterations <= 50);
    const auto& h = sol.report.residual_history;
    REQUIRE(h.size() >= 2);
    CHECK(h.back() < 1e-8);
    for (std::size_t k = 1; k < h.size(); ++k)
      if (h[k - 1] > 1e-14) CHECK(h[k] / h[k - 1] <= 0.62);  // 1.25x the |coupling| T^2/2 rate
    CHECK(fixed_point_residual(sol.u, uc, p) <= 2e-10);
  }
}

TEST_CASE("decomposition splits the solution exactly and bounds its regularity") {
  const ModelParams p(2.0, 1.2, 1.5);
  const double step = std::ldexp(1.0, -7);
  const GridSpec gs = make_spec(step, p.T, -1.5, 1.5);
  const ShiftMasses masses = characteristic_shift_masses(p.T, step, p.a);
  for (std::uint64_t r = 0; r < 3; ++r) {
    const GridField uc = stochastic_convolution(noise_for(gs, p.T, {31337, r}), p.a, gs);
    const PicardSolution sol = picard_solve(uc, p);
    const DecomposeResult d = decompose(sol.u, uc);
    CHECK((d.u_L.values - (sol.u.values - uc.values)).cwiseAbs().maxCoeff() == 0.0);
    double trusted_max = 0.0;  // sup_abs_u is over the trusted region only
    for (Eigen::Index i = 0; i < sol.u.values.rows(); ++i)
      for (Eigen::Index j = 0; j < sol.u.values.cols(); ++j)
        if (sol.u.trusted(i, j)) trusted_max = std::max(trusted_max, std::abs(sol.u.values(i, j)));
    CHECK(d.sup_abs_u == trusted_max);
    const double envelope =
        1.1 * std::abs(p.coupling()) * d.sup_abs_u * masses.total() / step;
    CHECK(d.lipschitz_statistic <= envelope);
  }
}

TEST_CASE("doubling the coupling doubles the regular part") {
  const double a = 2.0, step = std::ldexp(1.0, -5);
  const double m1 = std::sqrt(1.0 - 0.05), m2 = std::sqrt(1.0 - 0.10);
  const GridSpec gs = make_spec(step, 1.0, -1.5, 1.5);
  for (std::uint64_t r = 0; r < 3; ++r) {
    const GridField uc = stochastic_convolution(noise_for(gs, 1.0, {88, r}), a, gs);
    const DecomposeResult d1 = decompose(picard_solve(uc, ModelParams(a, m1, 1.0)).u, uc);
    const DecomposeResult d2 = decompose(picard_solve(uc, ModelParams(a, m2, 1.0)).u, uc);
    const double ratio =
        d2.u_L.values.cwiseAbs().maxCoeff() / d1.u_L.values.cwiseAbs().maxCoeff();
    CHECK(ratio >= 1.9);
    CHECK(ratio <= 2.1);
  }
}

TEST_CASE("characteristic shift masses match their defining integrals") {
  struct Config {
    double t, h, a;
  };
  for (const Config& c : {Config{1.5, std::ldexp(1.0, -7), 2.0}, Config{0.9, 0.01, 0.7}}) {
    const ShiftMasses m = characteristic_shift_masses(c.t, c.h, c.a);
    auto ramp = [&](double s) { return s * std::exp(-0.5 * c.a * s); };
    auto flat = [&](double s) { return std::exp(-0.5 * c.a * s); };
    const double overlap_ref =
        (1.0 - std::exp(-0.5 * c.a * c.h)) * oracles::simpson(ramp, 0.0, c.t, 1e-15);
    const double sliver_ref =
        c.h * std::exp(-0.5 * c.a * c.h) * oracles::simpson(flat, 0.0, c.t, 1e-15);
    const double cap_ref = oracles::simpson(ramp, 0.0, c.h, 1e-18);
    CHECK(m.overlap == doctest::Approx(overlap_ref).epsilon(1e-12));
    CHECK(m.sliver == doctest::Approx(sliver_ref).epsilon(1e-12));
    CHECK(m.cap == doctest::Approx(cap_ref).epsilon(1e-10));
    CHECK(m.total() == doctest::Approx(m.overlap + m.sliver + m.cap).epsilon(1e-15));
  }
  const ShiftMasses undamped = characteristic_shift_masses(1.2, 0.125, 0.0);
  CHECK(undamped.overlap == 0.0);
  CHECK(undamped.sliver == doctest::Approx(0.125 * 1.2).epsilon(1e-15));
  CHECK(undamped.cap == doctest::Approx(0.5 * 0.125 * 0.125).epsilon(1e-15));
  const ShiftMasses zero = characteristic_shift_masses(1.2, 0.0, 1.0);
  CHECK(zero.total() == 0.0);
}

TEST_CASE("grid field accessors") {
  const GridField f{-1.0, 0.25, 0.25, Eigen::MatrixXd::Ones(5, 9)};
  CHECK(f.t_at(2) == 0.5);
  CHECK(f.x_at(3) == -0.25);
  CHECK(f.trusted(0, 0));
  CHECK(f.trusted(4, 4));
  CHECK_FALSE(f.trusted(4, 3));
  CHECK_FALSE(f.trusted(4, 5 + 1));
}
