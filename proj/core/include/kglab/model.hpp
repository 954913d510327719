#pragma once

#include <cstddef>

namespace kglab {

inline constexpr double kSqrt2 = 1.41421356237309504880168872420969808;

// Damping regimes of the symbol -xi^2 - a d/dt - m^2, classified by the
// discriminant a^2/4 - m^2 of the zero-frequency mode.
enum class Regime { Oscillatory, Critical, Mixed };

// |a^2/4 - m^2| below this absolute tolerance counts as critically damped.
inline constexpr double kCriticalRegimeTol = 1e-12;

struct ModelParams {
  double a = 0.0;  // damping coefficient, >= 0
  double m = 0.0;  // mass, >= 0
  double T = 1.0;  // time horizon, > 0

  ModelParams() = default;
  ModelParams(double a_, double m_, double T_);

  double discriminant() const { return 0.25 * a * a - m * m; }
  // Coupling constant of the mass-damping reduction: u = u_C + lambda*K[u].
  double coupling() const { return discriminant(); }
};

Regime regime(const ModelParams& p);
const char* regime_name(Regime r);

struct CharCoords;

struct SpaceTimePoint {
  double t = 0.0;
  double x = 0.0;
  CharCoords to_char() const;
};

// Characteristic (rotated) coordinates w = (t-x)/sqrt2, z = (t+x)/sqrt2.
// Light cones become coordinate quarter-planes in (w, z).
struct CharCoords {
  double w = 0.0;
  double z = 0.0;
  SpaceTimePoint to_spacetime() const;
};

}  // namespace kglab
