#include "lambdasurf/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "lambdasurf/io.hpp"
#include "rk45.hpp"

#include <json.hpp>

namespace lambdasurf {

namespace {

constexpr double kRFloor = 1e-12;
constexpr double kStepFloor = 1e-13;
constexpr double kSeedTol = 1e-13;
constexpr int kScanPointsPerStep = 16;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

using detail::HermiteSpan;
using detail::PiController;
using detail::Vec3;

void check_state(const ProfileState& state) {
  if (!std::isfinite(state.x) || !std::isfinite(state.r) ||
      !std::isfinite(state.theta))
    throw DomainError("profile state has non-finite components");
  if (!(state.r > 0.0)) throw DomainError("profile state requires r > 0");
}

double rhs_theta(double x, double r, double theta, const Params& p) {
  return ((p.n - 1) / r - r) * std::cos(theta) + x * std::sin(theta) +
         p.lambda;
}

constexpr std::array<EventKind, 5> kAllEvents = {
    EventKind::theta_zero, EventKind::theta_half_pi, EventKind::theta_pi,
    EventKind::theta_dot_zero, EventKind::x_zero};

double event_value(EventKind kind, double x, double r, double theta,
                   const Params& p) {
  switch (kind) {
    case EventKind::theta_zero:
      return theta;
    case EventKind::theta_half_pi:
      return theta - std::numbers::pi / 2;
    case EventKind::theta_pi:
      return theta - std::numbers::pi;
    case EventKind::theta_dot_zero:
      return rhs_theta(x, r, theta, p);
    case EventKind::x_zero:
      return x;
  }
  return 0.0;
}

bool terminates_scan(EventKind kind) {
  return kind == EventKind::theta_zero || kind == EventKind::theta_pi;
}

}  // namespace

Derivatives rhs(const ProfileState& state, const Params& params) {
  validate(params);
  check_state(state);
  double ct = std::cos(state.theta);
  double st = std::sin(state.theta);
  return {ct, st, rhs_theta(state.x, state.r, state.theta, params)};
}

double theta_dot(const ProfileState& state, const Params& params) {
  return rhs(state, params).dtheta;
}

double initial_theta_dot(double delta, const Params& params) {
  validate(params);
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw DomainError("initial_theta_dot requires delta > 0");
  return -(delta * delta - params.lambda * delta - (params.n - 1)) / delta;
}

IntegratorControls IntegratorControls::defaults_for(const Params& params) {
  lambdasurf::validate(params);
  IntegratorControls c;
  c.r_max =
      std::max(10.0, 4.0 * cylinder_radius(params.n, std::fabs(params.lambda)));
  return c;
}

void IntegratorControls::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(rel_tol) || !positive(abs_tol))
    throw ConfigError("controls: tolerances must be positive");
  if (!positive(s_max) || !positive(r_max) || !positive(x_max))
    throw ConfigError("controls: s_max, r_max, x_max must be positive");
  if (!positive(event_tol)) throw ConfigError("controls: event_tol must be positive");
  if (max_steps <= 0) throw ConfigError("controls: max_steps must be positive");
  if (!positive(initial_step) || !positive(max_step) || !positive(step_safety))
    throw ConfigError("controls: step controls must be positive");
  if (sample_spacing < 0.0 || !std::isfinite(sample_spacing))
    throw ConfigError("controls: sample_spacing must be >= 0");
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::theta_zero: return "theta-zero";
    case EventKind::theta_half_pi: return "theta-half-pi";
    case EventKind::theta_pi: return "theta-pi";
    case EventKind::theta_dot_zero: return "theta-dot-zero";
    case EventKind::x_zero: return "x-zero";
  }
  return "?";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::event_stop: return "event-stop";
    case Termination::arc_budget: return "arc-budget";
    case Termination::escape: return "escape";
    case Termination::step_failure: return "step-failure";
  }
  return "?";
}

const EventRecord* Trajectory::find_event(EventKind kind) const {
  for (const auto& e : events)
    if (e.kind == kind) return &e;
  return nullptr;
}

ProfileState Trajectory::state_at(double s) const {
  if (samples.empty()) throw DomainError("state_at on empty trajectory");
  if (s <= samples.front().s) {
    const auto& a = samples.front();
    return {a.s, a.x, a.r, a.theta};
  }
  if (s >= samples.back().s) {
    const auto& a = samples.back();
    return {a.s, a.x, a.r, a.theta};
  }
  auto it = std::upper_bound(
      samples.begin(), samples.end(), s,
      [](double v, const Sample& smp) { return v < smp.s; });
  const Sample& b = *it;
  const Sample& a = *(it - 1);
  HermiteSpan span;
  span.s0 = a.s;
  span.h = b.s - a.s;
  span.y0 = {a.x, a.r, a.theta};
  span.y1 = {b.x, b.r, b.theta};
  span.f0 = {std::cos(a.theta), std::sin(a.theta), a.theta_dot};
  span.f1 = {std::cos(b.theta), std::sin(b.theta), b.theta_dot};
  Vec3 y = span.eval(s);
  return {s, y[0], y[1], y[2]};
}

namespace {

struct EventTracker {
  std::array<double, 5> sign{};  // 0 = not yet seeded
  std::array<bool, 5> fired{};

  void observe_seed(const std::array<double, 5>& g) {
    for (int k = 0; k < 5; ++k)
      if (sign[k] == 0.0 && std::fabs(g[k]) > kSeedTol)
        sign[k] = g[k] > 0.0 ? 1.0 : -1.0;
  }
};

struct Crossing {
  int kind;
  double s;
};

double refine_crossing(const HermiteSpan& span, const Params& params, int kind,
                       double sa, double ga, double sb, double gb,
                       double tol_s) {
  if (ga == 0.0) return sa;
  if (gb == 0.0) return sb;
  for (int it = 0; it < 256 && (sb - sa) > tol_s; ++it) {
    double sm = 0.5 * (sa + sb);
    if ((it & 1) == 0 && std::fabs(gb - ga) > 0.0) {
      double sec = sb - gb * (sb - sa) / (gb - ga);
      double lo = sa + 0.05 * (sb - sa);
      double hi = sb - 0.05 * (sb - sa);
      if (sec > lo && sec < hi) sm = sec;
    }
    Vec3 y = span.eval(sm);
    double gm = event_value(kAllEvents[kind], y[0], y[1], y[2], params);
    if (gm == 0.0) return sm;
    if (ga * gm < 0.0) {
      sb = sm;
      gb = gm;
    } else {
      sa = sm;
      ga = gm;
    }
  }
  return 0.5 * (sa + sb);
}

}  // namespace

Trajectory integrate(double delta, const Params& params,
                     const IntegratorControls& controls) {
  validate(params);
  controls.validate();
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw DomainError("integrate requires delta > 0");

  const bool dense = controls.sample_mode == SampleMode::dense;

  auto frhs = [&params](const Vec3& y) -> Vec3 {
    double r = y[1];
    if (!(r > kRFloor)) return {kNan, kNan, kNan};
    double ct = std::cos(y[2]);
    double st = std::sin(y[2]);
    return {ct, st, rhs_theta(y[0], r, y[2], params)};
  };

  Trajectory traj;
  traj.params = params;
  traj.delta = delta;
  traj.termination = Termination::arc_budget;

  Vec3 y = {0.0, delta, 0.0};
  Vec3 f = frhs(y);
  double s = 0.0;
  traj.samples.push_back({0.0, y[0], y[1], y[2], f[2]});

  EventTracker tracker;
  std::array<double, 5> g_prev;
  for (int k = 0; k < 5; ++k)
    g_prev[k] = event_value(kAllEvents[k], y[0], y[1], y[2], params);
  tracker.observe_seed(g_prev);

  PiController pi;
  pi.safety = controls.step_safety;
  double h = std::min({controls.initial_step, controls.max_step, controls.s_max});
  double next_out = controls.sample_spacing;  // used only in spacing mode
  std::int64_t steps = 0;
  bool done = false;

  while (!done) {
    if (steps >= controls.max_steps) {
      traj.termination = Termination::arc_budget;
      break;
    }
    ++steps;
    h = std::min({h, controls.max_step, controls.s_max - s});
    bool emit_endpoint = true;
    if (dense) {
      if (controls.sample_spacing > 0.0) {
        // Exact uniform sample clock: land on multiples of sample_spacing,
        // with controller micro-steps in between when accuracy demands.
        if (next_out - s < 1e-12) {
          // a controller-limited step stopped a hair short of the clock
          traj.samples.push_back({s, y[0], y[1], y[2], f[2]});
          next_out += controls.sample_spacing;
        }
        h = std::min(h, next_out - s);
        emit_endpoint = (s + h >= next_out - 1e-13);
      } else {
        // Stored samples are accepted-step endpoints; cap the step so the
        // chord between samples stays within 10*abs_tol of the solution
        // (|x''|, |r''| <= |theta'|, which may still grow within the step —
        // the floor keeps the cap honest across theta' zero crossings).
        double curv = std::max(std::fabs(f[2]), 1e-3);
        h = std::min(h, 0.55 * std::sqrt(80.0 * controls.abs_tol / curv));
      }
    }
    if (h < kStepFloor) {
      traj.termination =
          (controls.s_max - s < kStepFloor * 2) ? Termination::arc_budget
                                                : Termination::step_failure;
      break;
    }

    auto step = detail::dopri5_step(frhs, y, f, h, controls.abs_tol,
                                    controls.rel_tol);
    if (!(step.err <= 1.0)) {
      h *= pi.reject_factor(step.err);
      continue;
    }

    HermiteSpan span{s, h, y, step.y1, f, step.f1};
    const int m = dense ? 2 : kScanPointsPerStep;

    double s_prev = s;
    for (int j = 1; j <= m && !done; ++j) {
      double s_cur = (j == m) ? s + h : s + h * j / m;
      Vec3 yc = (j == m) ? step.y1 : span.eval(s_cur);

      std::array<double, 5> g_cur;
      for (int k = 0; k < 5; ++k)
        g_cur[k] = event_value(kAllEvents[k], yc[0], yc[1], yc[2], params);

      // Locate all first crossings inside (s_prev, s_cur].
      std::vector<Crossing> found;
      for (int k = 0; k < 5; ++k) {
        if (tracker.fired[k] || tracker.sign[k] == 0.0) continue;
        if (g_cur[k] == 0.0 || g_cur[k] * tracker.sign[k] < 0.0) {
          double sc = refine_crossing(span, params, k, s_prev,
                                      tracker.sign[k] * std::fabs(g_prev[k]),
                                      s_cur, g_cur[k], controls.event_tol);
          found.push_back({k, sc});
        }
      }
      std::sort(found.begin(), found.end(),
                [](const Crossing& a, const Crossing& b) { return a.s < b.s; });
      for (const Crossing& c : found) {
        Vec3 ye = span.eval(c.s);
        ProfileState est{c.s, ye[0], ye[1], ye[2]};
        tracker.fired[c.kind] = true;
        traj.events.push_back({kAllEvents[c.kind], c.s, est});
        if (terminates_scan(kAllEvents[c.kind])) {
          Vec3 fe = frhs(ye);
          traj.samples.push_back({c.s, ye[0], ye[1], ye[2], fe[2]});
          traj.termination = Termination::event_stop;
          done = true;
          break;
        }
      }
      if (done) break;

      for (int k = 0; k < 5; ++k) {
        if (tracker.sign[k] == 0.0 && std::fabs(g_cur[k]) > kSeedTol)
          tracker.sign[k] = g_cur[k] > 0.0 ? 1.0 : -1.0;
        else if (!tracker.fired[k] && tracker.sign[k] != 0.0 &&
                 g_cur[k] != 0.0)
          tracker.sign[k] = g_cur[k] > 0.0 ? 1.0 : -1.0;
      }
      g_prev = g_cur;
      s_prev = s_cur;

      bool emitted = j == m && emit_endpoint;
      if (emitted) {
        traj.samples.push_back({s_cur, yc[0], yc[1], yc[2], step.f1[2]});
        if (controls.sample_spacing > 0.0) next_out += controls.sample_spacing;
      }

      if (yc[1] > controls.r_max && std::fabs(yc[0]) > controls.x_max) {
        if (!emitted) {
          Vec3 fc = frhs(yc);
          traj.samples.push_back({s_cur, yc[0], yc[1], yc[2], fc[2]});
        }
        traj.termination = Termination::escape;
        done = true;
      }
    }
    if (done) break;

    s += h;
    y = step.y1;
    f = step.f1;

    if (s >= controls.s_max - 1e-14) {
      traj.termination = Termination::arc_budget;
      break;
    }

    h *= pi.next_factor(step.err);
    pi.err_prev = std::max(step.err, 1e-30);
  }

  // Budget and failure stops can land between emitted samples.
  if (!done && traj.samples.back().s < s - 1e-13)
    traj.samples.push_back({s, y[0], y[1], y[2], f[2]});

  std::sort(traj.events.begin(), traj.events.end(),
            [](const EventRecord& a, const EventRecord& b) { return a.s < b.s; });
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "s,x,r,theta,theta_dot\n";
  for (const Sample& p : traj.samples)
    os << fmt17(p.s) << ',' << fmt17(p.x) << ',' << fmt17(p.r) << ','
       << fmt17(p.theta) << ',' << fmt17(p.theta_dot) << '\n';
}

std::string events_json(const Trajectory& traj) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const EventRecord& e : traj.events) {
    nlohmann::ordered_json row;
    row["kind"] = to_string(e.kind);
    row["s"] = e.s;
    row["x"] = e.state.x;
    row["r"] = e.state.r;
    row["theta"] = e.state.theta;
    out.push_back(row);
  }
  return out.dump(2);
}

}  // namespace lambdasurf
