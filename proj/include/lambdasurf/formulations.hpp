#ifndef LAMBDASURF_FORMULATIONS_HPP
#define LAMBDASURF_FORMULATIONS_HPP

#include <span>
#include <string>
#include <vector>

#include "lambdasurf/ode.hpp"

namespace lambdasurf {

/// Thrown by cross_validate when a sub-arc is too short for finite
/// differences.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// u''(x) for the graph r = u(x):
///   u'' = (1 + u'^2) (x u' - u + (n-1)/u + lambda sqrt(1 + u'^2)).
double u_second(double x, double u, double u1, const Params& params);

/// f''(r) for the graph x = f(r):
///   f'' = (1 + f'^2) ((r - (n-1)/r) f' - f - lambda sqrt(1 + f'^2)).
double f_second(double r, double f, double f1, const Params& params);

/// f'''(r) obtained by differentiating the f-graph equation once.
double f_third(double r, double f1, double f2, const Params& params);

/// Point of a u-graph; u2 is evaluated from the graph equation.
struct GraphSampleU {
  double x;
  double u;
  double u1;
  double u2;
};

/// Point of an f-graph; f2 and f3 are evaluated from the graph equations.
struct GraphSampleF {
  double r;
  double f;
  double f1;
  double f2;
  double f3;
};

/// Rescaled variables xi = x/delta, rho = (r - delta)/delta, alpha = theta
/// at t = s/delta.
struct RescaledState {
  double t;
  double xi;
  double rho;
  double alpha;
};

struct RescaledDerivatives {
  double dxi;
  double drho;
  double dalpha;
};

/// Rescaled system:
///   xi' = cos alpha, rho' = sin alpha,
///   alpha' = (n-1)/(1+rho) cos alpha + lambda delta
///            + delta^2 (xi sin alpha - (1+rho) cos alpha).
/// Valid for delta >= 0; delta = 0 is the explicit limit system.
RescaledDerivatives rescaled_rhs(const RescaledState& state, double delta,
                                 const Params& params);

/// Integrate the rescaled system from (0, 0, 0) to t_max and return n_out + 1
/// states on the uniform output grid t_k = k * t_max / n_out.
std::vector<RescaledState> integrate_rescaled(double delta,
                                              const Params& params,
                                              double t_max, std::size_t n_out,
                                              double rel_tol = 1e-12,
                                              double abs_tol = 1e-13);

/// t(rho) = integral_0^rho (1+p)^(n-1) / sqrt((1+p)^(2(n-1)) - 1) dp for the
/// delta = 0 limit profile. The integrable endpoint singularity is removed
/// by the substitution p = w^2 before adaptive quadrature.
double limit_profile_t_of_rho(double rho, const Params& params);

/// Monotone inversion of limit_profile_t_of_rho; rho(0) = 0.
double limit_profile_rho_of_t(double t, const Params& params);

/// Re-express a theta in (eps, pi/2 - eps) sub-arc of the trajectory as the
/// graphs r = u(x) and x = f(r), evaluate second derivatives by centered
/// finite differences on the (non-uniform) samples, and return the largest
/// absolute defect against the two graph equations. The caller compares the
/// result to tol; the returned value does not depend on it.
double cross_validate(const Trajectory& traj, double tol);

/// Analytic f-graph samples along the r-monotone part of a shot
/// (f1 = cot theta, f2 = -theta' / sin^3 theta, f3 from the graph equation).
/// Samples with sin theta <= sin_guard are skipped.
std::vector<GraphSampleF> f_graph_from_trajectory(const Trajectory& traj,
                                                  double sin_guard = 1e-3);

/// Analytic u-graph samples along the x-monotone part of a shot
/// (u1 = tan theta, u2 from the graph equation). Samples with
/// cos theta <= cos_guard are skipped.
std::vector<GraphSampleU> u_graph_from_trajectory(const Trajectory& traj,
                                                  double cos_guard = 1e-3);

struct LemmaViolation {
  double r;
  double value;
  std::string what;
};

/// f1 * f3 > 0 at samples where |f2| < f2_tol and |f1| > 10 * f2_tol.
std::vector<LemmaViolation> check_inflection_slope(
    std::span<const GraphSampleF> arc, double f2_tol);

/// Once f1*f2 > guard at some abscissa, it stays positive for larger r
/// (equivalently f1*f2 < -guard propagates to smaller r).
std::vector<LemmaViolation> check_sign_propagation(
    std::span<const GraphSampleF> arc, double guard);

/// f2 changes sign at most once outside the guard band.
std::vector<LemmaViolation> check_single_inflection(
    std::span<const GraphSampleF> arc, double guard);

struct ValidationRecord {
  std::string check;
  double arc_lo = 0.0;
  double arc_hi = 0.0;
  double max_defect = 0.0;
  bool pass = false;
};

/// JSON array of {check, arc, max_defect, pass}.
std::string validation_report_json(std::span<const ValidationRecord> records);

}  // namespace lambdasurf

#endif
