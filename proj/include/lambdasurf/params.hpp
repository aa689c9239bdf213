#ifndef LAMBDASURF_PARAMS_HPP
#define LAMBDASURF_PARAMS_HPP

#include <cmath>
#include <stdexcept>

namespace lambdasurf {

/// Problem instance: dimension n of the hypersurface and the constant
/// lambda in H + <X, nu> = lambda.
struct Params {
  int n = 2;
  double lambda = 0.0;
};

/// Thrown when inputs violate a documented precondition.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when controls or run configuration are invalid.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline void validate(const Params& p) {
  if (p.n < 2) throw DomainError("params: n must be >= 2");
  if (!std::isfinite(p.lambda)) throw DomainError("params: lambda must be finite");
}

/// Radius of the equilibrium cylinder, the positive root of
/// r^2 - lambda*r - (n-1) = 0.
inline double cylinder_radius(int n, double lambda) {
  return 0.5 * (lambda + std::sqrt(lambda * lambda + 4.0 * (n - 1)));
}

inline double cylinder_radius(const Params& p) {
  return cylinder_radius(p.n, p.lambda);
}

/// Cylinder radius for the opposite normal convention.
inline double flipped_cylinder_radius(const Params& p) {
  return cylinder_radius(p.n, -p.lambda);
}

/// Radius of the round-sphere solution, (-lambda + sqrt(lambda^2 + 4n)) / 2.
inline double sphere_radius(const Params& p) {
  return 0.5 * (-p.lambda + std::sqrt(p.lambda * p.lambda + 4.0 * p.n));
}

}  // namespace lambdasurf

#endif
