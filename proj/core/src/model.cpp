#include "kglab/model.hpp"

#include <cmath>
#include <stdexcept>

namespace kglab {

ModelParams::ModelParams(double a_, double m_, double T_) : a(a_), m(m_), T(T_) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("ModelParams: a must be finite and >= 0");
  if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("ModelParams: m must be finite and >= 0");
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("ModelParams: T must be finite and > 0");
}

Regime regime(const ModelParams& p) {
  const double d = p.discriminant();
  if (std::fabs(d) <= kCriticalRegimeTol) return Regime::Critical;
  return d < 0.0 ? Regime::Oscillatory : Regime::Mixed;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Oscillatory: return "oscillatory";
    case Regime::Critical: return "critical";
    case Regime::Mixed: return "mixed";
  }
  return "?";
}

CharCoords SpaceTimePoint::to_char() const { return {(t - x) / kSqrt2, (t + x) / kSqrt2}; }

SpaceTimePoint CharCoords::to_spacetime() const { return {(w + z) / kSqrt2, (z - w) / kSqrt2}; }

}  // namespace kglab
