#pragma once

#include <stdexcept>
#include <string>

namespace kglab {

// Requested quadrature tolerance could not be certified. Carries the best
// estimate and the error bound actually achieved so callers can decide
// whether to accept it anyway.
class ToleranceNotMet : public std::runtime_error {
 public:
  ToleranceNotMet(const std::string& what, double estimate, double error_bound)
      : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}
  double estimate() const { return estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

// Cholesky failed even after the jitter ladder. Carries the smallest
// eigenvalue of the offending matrix.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

// A requested point's light cone (or the point itself) is not covered by the
// noise grid.
class CoverageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two grids that must be congruent (same steps, origin, shape) are not.
class GridMismatchError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kglab
