#ifndef LAMBDASURF_CLASSIFY_HPP
#define LAMBDASURF_CLASSIFY_HPP

#include <iosfwd>
#include <limits>
#include <vector>

#include "lambdasurf/ode.hpp"

namespace lambdasurf {

inline constexpr double kUnresolved = std::numeric_limits<double>::infinity();

/// First-crossing arc lengths extracted from a shot. Unresolved scans hold
/// the surrogate +inf; S is the right end of the integrated arc.
struct EventSummary {
  double s1 = kUnresolved;  // first theta in {0, pi}
  double s2 = kUnresolved;  // first theta' = 0
  double s3 = kUnresolved;  // first theta in {0, pi/2}
  double s4 = kUnresolved;  // first x = 0 with s > 0
  double S = 0.0;
  double b = std::numeric_limits<double>::quiet_NaN();  // r at s1
  double x_at_s1 = std::numeric_limits<double>::quiet_NaN();
  double theta_at_s1 = std::numeric_limits<double>::quiet_NaN();
  Termination termination = Termination::arc_budget;

  bool s1_resolved() const { return std::isfinite(s1); }
  bool s2_resolved() const { return std::isfinite(s2); }
  bool s3_resolved() const { return std::isfinite(s3); }
  bool s4_resolved() const { return std::isfinite(s4); }

  // Surrogate values for ordering comparisons: unresolved scans count as S.
  double s1_eff() const { return s1_resolved() ? s1 : S; }
  double s2_eff() const { return s2_resolved() ? s2 : S; }
  double s3_eff() const { return s3_resolved() ? s3 : S; }
  double s4_eff() const { return s4_resolved() ? s4 : S; }
};

/// Requires a shot with 0 < delta < R_lambda away from the equilibrium
/// degeneracy margin; throws DomainError otherwise.
EventSummary summarize(const Trajectory& traj);

enum class TypeId {
  type1_1,
  type1_2,
  type1_3,
  type2,
  type3_candidate,
  undetermined,
};

const char* to_string(TypeId id);

struct TypeLabel {
  TypeId label = TypeId::undetermined;
  /// Smallest event-ordering gap supporting the label, in arc length.
  /// Zero for the boundary types (1.2, 3-candidate) and for undetermined.
  double margin = 0.0;
};

struct ClassifyOptions {
  /// |x(s1)| band (scaled by max(1, r(s1))) inside which a resolved type-1
  /// shot is reported as the boundary type 1.2.
  double closure_band = 1e-4;
  /// Ordering gaps below this are reported as undetermined.
  double event_tol = 1e-12;
};

/// Pure re-derivation of the label from a summary; classify_delta and the
/// sweep both go through here.
TypeLabel label_from_summary(const EventSummary& summary,
                             const ClassifyOptions& options = {});

/// Shoot at delta and classify. Requires 0 < delta < R_lambda.
TypeLabel classify_delta(double delta, const Params& params,
                         const IntegratorControls& controls,
                         const ClassifyOptions& options = {});

struct RadiusBoundCheck {
  const char* bound_name;  // "R_minus_lambda" or "R_lambda"
  double bound;
  double b;
  bool satisfied;
};

struct RadiusBoundReport {
  bool applicable = false;  // false when s1 is unresolved
  std::vector<RadiusBoundCheck> checks;
};

/// When s3 < s1 checks b > R_{-lambda}; when s2 < s1 checks b > R_lambda.
RadiusBoundReport check_radius_bounds(const EventSummary& summary,
                                      const Params& params);

/// One row of the classification CSV:
/// delta,label,s1,s2,s3,s4,b,margin
void write_classification_row(std::ostream& os, double delta,
                              const TypeLabel& label,
                              const EventSummary& summary);

}  // namespace lambdasurf

#endif
