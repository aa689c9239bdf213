#include "lambdasurf/classify.hpp"

#include <cmath>
#include <ostream>

#include "lambdasurf/io.hpp"

namespace lambdasurf {

namespace {


// Shots indistinguishable from the equilibrium are rejected; the constant
// cylinder is served by exact fixtures.
constexpr double kDegeneracyMargin = 1e-9;

void require_shooting_delta(double delta, const Params& params) {
  double r_lambda = cylinder_radius(params);
  if (!(delta > 0.0) || !(delta < r_lambda))
    throw DomainError("classification requires 0 < delta < R_lambda");
  if (std::fabs(delta - r_lambda) < kDegeneracyMargin * std::max(1.0, r_lambda))
    throw DomainError("delta is within the equilibrium degeneracy margin");
}

}  // namespace

const char* to_string(TypeId id) {
  switch (id) {
    case TypeId::type1_1: return "type1.1";
    case TypeId::type1_2: return "type1.2";
    case TypeId::type1_3: return "type1.3";
    case TypeId::type2: return "type2";
    case TypeId::type3_candidate: return "type3-candidate";
    case TypeId::undetermined: return "undetermined";
  }
  return "?";
}

EventSummary summarize(const Trajectory& traj) {
  validate(traj.params);
  require_shooting_delta(traj.delta, traj.params);
  if (traj.samples.empty())
    throw DomainError("summarize requires a non-empty trajectory");

  EventSummary out;
  out.S = traj.s_end();
  out.termination = traj.termination;

  const EventRecord* th0 = traj.find_event(EventKind::theta_zero);
  const EventRecord* thh = traj.find_event(EventKind::theta_half_pi);
  const EventRecord* thp = traj.find_event(EventKind::theta_pi);
  const EventRecord* tdz = traj.find_event(EventKind::theta_dot_zero);
  const EventRecord* xz = traj.find_event(EventKind::x_zero);

  const EventRecord* s1_rec = nullptr;
  if (th0 && (!thp || th0->s <= thp->s)) s1_rec = th0;
  else if (thp) s1_rec = thp;
  if (s1_rec) {
    out.s1 = s1_rec->s;
    out.b = s1_rec->state.r;
    out.x_at_s1 = s1_rec->state.x;
    out.theta_at_s1 = s1_rec->state.theta;
  }
  if (tdz) out.s2 = tdz->s;
  if (th0 && (!thh || th0->s <= thh->s)) out.s3 = th0->s;
  else if (thh) out.s3 = thh->s;
  if (xz) out.s4 = xz->s;
  return out;
}

TypeLabel label_from_summary(const EventSummary& summary,
                             const ClassifyOptions& options) {
  if (summary.termination == Termination::step_failure)
    return {TypeId::undetermined, 0.0};

  const double s1 = summary.s1_eff();
  const double s2 = summary.s2_eff();
  const double s3 = summary.s3_eff();
  const bool type1_order = summary.s3_resolved() && s3 < s1 &&
                           !(summary.s1_resolved() && summary.s1 == summary.s3);
  const bool type2_order = summary.s2_resolved() && s2 < s1;

  // The orderings s3 < s1 and s2 < s1 exclude each other on exact solutions;
  // a numerical coincidence is a boundary, not a guess.
  if (type1_order && type2_order) return {TypeId::undetermined, 0.0};

  if (type2_order) {
    double margin = s1 - s2;
    if (margin < options.event_tol) return {TypeId::undetermined, margin};
    return {TypeId::type2, margin};
  }

  if (type1_order) {
    double margin1 = s1 - s3;
    if (margin1 < options.event_tol) return {TypeId::undetermined, margin1};
    if (!summary.s1_resolved())
      return {TypeId::undetermined, 0.0};  // sub-type needs theta(s1)

    double closure = std::fabs(summary.x_at_s1);
    if (closure < options.closure_band * std::max(1.0, summary.b))
      return {TypeId::type1_2, 0.0};
    if (summary.s4_resolved() && summary.s4 < summary.s1) {
      double margin = std::min(margin1, summary.s1 - summary.s4);
      if (margin < options.event_tol) return {TypeId::undetermined, margin};
      return {TypeId::type1_1, margin};
    }
    // x never crossed zero: s4 > s1, with |x(s1)| as the gap to the
    // boundary (|x'(s1)| = 1 there).
    double margin = std::min(margin1, closure);
    if (margin < options.event_tol) return {TypeId::undetermined, margin};
    return {TypeId::type1_3, margin};
  }

  // No deciding event fired.
  if (summary.termination == Termination::escape &&
      !summary.s1_resolved() && !summary.s2_resolved() &&
      !summary.s3_resolved() && !summary.s4_resolved())
    return {TypeId::type3_candidate, 0.0};

  return {TypeId::undetermined, 0.0};
}

TypeLabel classify_delta(double delta, const Params& params,
                         const IntegratorControls& controls,
                         const ClassifyOptions& options) {
  validate(params);
  require_shooting_delta(delta, params);
  Trajectory traj = integrate(delta, params, controls);
  return label_from_summary(summarize(traj), options);
}

RadiusBoundReport check_radius_bounds(const EventSummary& summary,
                                      const Params& params) {
  validate(params);
  RadiusBoundReport report;
  if (!summary.s1_resolved()) return report;
  report.applicable = true;
  if (summary.s3_resolved() && summary.s3 < summary.s1) {
    double bound = flipped_cylinder_radius(params);
    report.checks.push_back(
        {"R_minus_lambda", bound, summary.b, summary.b > bound});
  }
  if (summary.s2_resolved() && summary.s2 < summary.s1) {
    double bound = cylinder_radius(params);
    report.checks.push_back({"R_lambda", bound, summary.b, summary.b > bound});
  }
  return report;
}

void write_classification_row(std::ostream& os, double delta,
                              const TypeLabel& label,
                              const EventSummary& summary) {
  os << fmt17(delta) << ',' << to_string(label.label) << ','
     << fmt17(summary.s1) << ',' << fmt17(summary.s2) << ','
     << fmt17(summary.s3) << ',' << fmt17(summary.s4) << ','
     << fmt17(summary.b) << ',' << fmt17(label.margin) << '\n';
}

}  // namespace lambdasurf
