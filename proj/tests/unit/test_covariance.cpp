#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "kglab/covariance.hpp"
#include "kglab/model.hpp"
#include "oracles.hpp"

using namespace kglab;

TEST_CASE("critical covariance matches cone-overlap quadrature") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> Ut(0.0, 3.0), Ux(-3.0, 3.0);
  for (double a : {0.7, 1.6}) {
    int checked = 0;
    while (checked < 25) {
      const SpaceTimePoint p{Ut(rng), Ux(rng)}, q{Ut(rng), Ux(rng)};
      const double probe = oracles::covariance_critical_quadrature(p, q, a, 1e-10);
      if (probe < 1e-9) continue;  // keep relative error well defined
      const double ref = oracles::covariance_critical_quadrature(p, q, a, 1e-10 * probe);
      const double got = cov_critical(p, q, a);
      CHECK(got == doctest::Approx(ref).epsilon(1e-9));
      ++checked;
    }
  }
}

TEST_CASE("spectral covariance matches time-domain Bessel quadrature") {
  // Two regimes the closed form cannot reach; the oracle integrates the
  // real-space Bessel kernel product directly.
  const std::vector<std::pair<SpaceTimePoint, SpaceTimePoint>> pairs = {
      {{1.2, 0.3}, {0.7, -0.5}}, {{2.0, 0.0}, {1.0, 1.0}}};
  for (const ModelParams& p : {ModelParams(1.0, 0.8, 3.0), ModelParams(2.0, 0.3, 3.0)}) {
    for (const auto& [u, v] : pairs) {
      const double ref = oracles::covariance_time_domain(u, v, p, 1e-9);
      const double got = cov_spectral(u, v, p, 1e-10);
      CHECK(got == doctest::Approx(ref).epsilon(1e-6));
    }
  }
}

TEST_CASE("spectral and closed form agree at critical coupling") {
  const ModelParams p(1.4, 0.7, 3.0);
  REQUIRE(regime(p) == Regime::Critical);
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> Ut(0.05, 3.0), Ux(-3.0, 3.0);
  int checked = 0;
  while (checked < 10) {
    const SpaceTimePoint u{Ut(rng), Ux(rng)}, v{Ut(rng), Ux(rng)};
    const double cc = cov_critical(u, v, p.a);
    if (cc < 1e-6) continue;
    CHECK(cov_spectral(u, v, p, 1e-9) == doctest::Approx(cc).epsilon(1e-7));
    ++checked;
  }
}

TEST_CASE("undamped wave variance is t^2/4 at every interior point") {
  const ModelParams wave(0.0, 0.0, 3.0);
  CHECK(variance({1.0, 0.0}, wave) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(variance({1.0, 0.7}, wave) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(variance({2.0, -0.3}, wave) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(variance({0.0, 0.0}, wave) == 0.0);
}

TEST_CASE("covariance dispatcher picks the regime route") {
  const SpaceTimePoint u{1.1, 0.2}, v{0.8, -0.4};
  const ModelParams crit(1.0, 0.5, 2.0);
  CHECK(covariance(u, v, crit) == cov_critical(u, v, crit.a));
  const ModelParams osc(1.0, 0.8, 2.0);
  CHECK(covariance(u, v, osc) == cov_spectral(u, v, osc));
}

TEST_CASE("increment second moment: symmetry, zero lag, covariance route") {
  const ModelParams p(1.0, 0.5, 3.0);
  const SpaceTimePoint u{1.0, 0.2}, v{1.3, -0.1};
  CHECK(increment_moment(u, u, p) <= 1e-18);
  CHECK(increment_moment(u, v, p) == doctest::Approx(increment_moment(v, u, p)).epsilon(1e-12));
  const double via_cov = variance(u, p) + variance(v, p) - 2.0 * covariance(u, v, p);
  CHECK(increment_moment(u, v, p) == doctest::Approx(via_cov).epsilon(1e-10));
}

TEST_CASE("rectangle increment moment: route agreement, scaling, envelope") {
  const ModelParams p(1.0, 0.5, 4.0);
  for (double t : {1.0, 0.8}) {
    const double x = t == 1.0 ? 0.2 : -0.3;
    double prev_ratio = 0.0;
    for (int k = 3; k <= 8; ++k) {
      const double e = std::ldexp(1.0, -k);
      const double comb = rect_increment_moment_combination(t, x, e, e, p);
      const double regs = rect_increment_moment_regions(t, x, e, e, p.a);
      const double disp = rect_increment_moment(t, x, e, e, p);
      CHECK(comb == doctest::Approx(regs).epsilon(1e-10));
      CHECK(disp == doctest::Approx(regs).epsilon(1e-10));
      const double ratio = disp / (e * e);
      CHECK(ratio <= 0.375);  // frozen envelope: 1.5x the observed supremum
      if (k == 8) CHECK(ratio == doctest::Approx(prev_ratio).epsilon(0.05));
      prev_ratio = ratio;
    }
    // anisotropic rectangle goes through the same routes
    const double e1 = std::ldexp(1.0, -3), e2 = std::ldexp(1.0, -5);
    CHECK(rect_increment_moment_combination(t, x, e1, e2, p) ==
          doctest::Approx(rect_increment_moment_regions(t, x, e1, e2, p.a)).epsilon(1e-10));
  }
}

TEST_CASE("characteristic-line covariance scale") {
  const double t0 = 1.2, a = 1.3;
  auto exp_int = [&](double s) { return std::exp(a * s); };
  const double ref = kSqrt2 * oracles::simpson(exp_int, 0.0, t0, 1e-14);
  CHECK(c0_scale(t0, a) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(c0_scale(0.5, 0.0) == doctest::Approx(kSqrt2 * 0.5).epsilon(1e-15));

  const double c0 = c0_scale(t0, a);
  CHECK(cov_Y(0.4, 0.9, t0, a) == doctest::Approx(c0 * 0.4).epsilon(1e-12));
  CHECK(cov_Y(0.9, 0.4, t0, a) == doctest::Approx(c0 * 0.4).epsilon(1e-12));
  CHECK(cov_Y(0.0, 0.7, t0, a) == 0.0);

  const CharCoords c1{0.9, 0.6}, c2{1.4, 0.6};
  CHECK(cov_X(c1, c2, t0, a) == doctest::Approx(cov_X(c2, c1, t0, a)).epsilon(1e-12));
  CHECK(cov_X(c1, c1, t0, a) >= 0.0);
}

TEST_CASE("conditional variance formulas") {
  const ModelParams p(1.0, 0.5, 4.0);
  const SpaceTimePoint target = CharCoords{1.0, 0.8}.to_spacetime();
  const SpaceTimePoint c1 = CharCoords{1.0, 0.5}.to_spacetime();
  const SpaceTimePoint c2 = CharCoords{1.0, 1.1}.to_spacetime();
  const SpaceTimePoint c3 = CharCoords{1.0, 0.65}.to_spacetime();

  const std::vector<SpaceTimePoint> none;
  CHECK(conditional_variance(target, none, p) == doctest::Approx(variance(target, p)).epsilon(1e-12));

  const std::vector<SpaceTimePoint> one{c1};
  const double var_t = variance(target, p);
  const double var_c = variance(c1, p);
  const double cov_tc = covariance(target, c1, p);
  CHECK(conditional_variance(target, one, p) ==
        doctest::Approx(var_t - cov_tc * cov_tc / var_c).epsilon(1e-10));

  const std::vector<SpaceTimePoint> two{c1, c2};
  const std::vector<SpaceTimePoint> three{c1, c2, c3};
  CHECK(conditional_variance(target, two, p) <= conditional_variance(target, one, p) + 1e-12);
  CHECK(conditional_variance(target, three, p) <= conditional_variance(target, two, p) + 1e-12);

  const std::vector<SpaceTimePoint> self{target, c1};
  CHECK(conditional_variance(target, self, p) <= 1e-10 * var_t);
}
