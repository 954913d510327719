#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kglab {

// Empirical quantile with linear interpolation on the sorted order statistics.
inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p outside [0,1]");
  std::sort(v.begin(), v.end());
  const double pos = p * double(v.size() - 1);
  const auto lo = std::size_t(pos);
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - double(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

struct Welford {
  std::size_t n = 0;
  double mean = 0.0, m2 = 0.0, m4_acc = 0.0;  // m4_acc: sum of (x-mean)^4 updated naively

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / double(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
};

// Excess-free kurtosis E[(x-mean)^4]/Var^2 from a full sample (two-pass).
inline double kurtosis(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("kurtosis: need at least 2 samples");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  double s2 = 0.0, s4 = 0.0;
  for (double x : v) {
    const double d = x - mean;
    s2 += d * d;
    s4 += d * d * d * d;
  }
  s2 /= double(v.size());
  s4 /= double(v.size());
  return s4 / (s2 * s2);
}

// Least-squares slope of y against x.
inline double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("regression_slope: need matching samples, >= 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(x.size());
  my /= double(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace kglab
