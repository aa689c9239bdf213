#ifndef LAMBDASURF_ODE_HPP
#define LAMBDASURF_ODE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lambdasurf/params.hpp"

namespace lambdasurf {

/// One point of the profile curve in arc-length parametrization.
/// The tangent is (cos theta, sin theta); theta is kept unwrapped.
struct ProfileState {
  double s = 0.0;
  double x = 0.0;
  double r = 0.0;
  double theta = 0.0;
};

struct Derivatives {
  double dx;
  double dr;
  double dtheta;
};

/// Right-hand side of the profile system:
///   x' = cos theta,  r' = sin theta,
///   theta' = ((n-1)/r - r) cos theta + x sin theta + lambda.
Derivatives rhs(const ProfileState& state, const Params& params);

/// The theta' component alone.
double theta_dot(const ProfileState& state, const Params& params);

/// theta'(0) = -(delta^2 - lambda*delta - (n-1))/delta for a shot
/// launched from (x, r, theta) = (0, delta, 0).
double initial_theta_dot(double delta, const Params& params);

/// Sample storage policy. `dense` subdivides every accepted step so that
/// linear interpolation of (x, r) between stored samples stays within
/// 10*abs_tol of the true solution; `steps` stores accepted step endpoints
/// only (event detection is unaffected).
enum class SampleMode { dense, steps };

struct IntegratorControls {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double s_max = 100.0;
  double r_max = 10.0;
  double x_max = 50.0;
  double event_tol = 1e-12;
  std::int64_t max_steps = 10'000'000;
  double initial_step = 1e-4;
  // Keeps the quartic dense-output error of the cubic Hermite below the
  // 10*abs_tol interpolation contract at default tolerances.
  double max_step = 0.005;
  double step_safety = 0.9;
  double sample_spacing = 0.0;  // > 0 forces a fixed output spacing
  SampleMode sample_mode = SampleMode::dense;

  /// Defaults with the escape radius tied to the problem instance:
  /// r_max = max(10, 4*R_{|lambda|}).
  static IntegratorControls defaults_for(const Params& params);

  void validate() const;  // throws ConfigError
};

enum class EventKind {
  theta_zero,
  theta_half_pi,
  theta_pi,
  theta_dot_zero,
  x_zero,
};

const char* to_string(EventKind kind);

struct EventRecord {
  EventKind kind;
  double s;
  ProfileState state;
};

enum class Termination {
  event_stop,   // a theta = 0 or theta = pi crossing ended the scan
  arc_budget,   // s_max or max_steps exhausted
  escape,       // r > r_max and |x| > x_max
  step_failure, // step size underflow, r underflow, or non-finite state
};

const char* to_string(Termination t);

struct Sample {
  double s;
  double x;
  double r;
  double theta;
  double theta_dot;
};

struct Trajectory {
  Params params;
  double delta = 0.0;
  std::vector<Sample> samples;
  std::vector<EventRecord> events;  // first occurrence per kind, sorted by s
  Termination termination = Termination::arc_budget;

  const EventRecord* find_event(EventKind kind) const;

  double s_end() const { return samples.empty() ? 0.0 : samples.back().s; }

  /// Cubic Hermite evaluation between stored samples. s is clamped to the
  /// sampled range.
  ProfileState state_at(double s) const;
};

/// Integrate the profile system from (x, r, theta) = (0, delta, 0) with an
/// embedded Dormand-Prince 5(4) pair and PI step control. Each of the five
/// event functions (theta, theta - pi/2, theta - pi, theta', x) has its
/// first sign change localized to within event_tol in s; the first theta = 0
/// or theta = pi crossing terminates the scan. delta = R_lambda integrates
/// to the constant cylinder (no events fire).
Trajectory integrate(double delta, const Params& params,
                     const IntegratorControls& controls);

/// CSV with header s,x,r,theta,theta_dot, one row per sample,
/// 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// JSON sidecar: array of {kind, s, x, r, theta}.
std::string events_json(const Trajectory& traj);

}  // namespace lambdasurf

#endif
