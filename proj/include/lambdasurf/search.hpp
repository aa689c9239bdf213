#ifndef LAMBDASURF_SEARCH_HPP
#define LAMBDASURF_SEARCH_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lambdasurf/classify.hpp"

namespace lambdasurf {

enum class SearchTarget { cylinder, torus_lower, torus_upper };

const char* to_string(SearchTarget target);

struct SweepRow {
  double delta = 0.0;
  TypeId label = TypeId::undetermined;
  double margin = 0.0;
  EventSummary summary;
  std::string error;  // non-empty when classification of this row failed

  bool ok() const { return error.empty(); }
};

/// Thrown when the seed sweep exposes no bracket for the requested target.
struct NoBracketError : std::runtime_error {
  NoBracketError(const std::string& msg, std::vector<SweepRow> rows)
      : std::runtime_error(msg), sweep(std::move(rows)) {}
  std::vector<SweepRow> sweep;
};

/// Thrown when a bisection cannot take a side at the requested tolerance.
struct PrecisionLimitError : std::runtime_error {
  PrecisionLimitError(const std::string& msg, double lo_, double hi_)
      : std::runtime_error(msg), lo(lo_), hi(hi_) {}
  double lo;
  double hi;
};

/// Thrown when the two torus parameters fail to separate.
struct DistinctRootsError : std::runtime_error {
  DistinctRootsError(const std::string& msg, double t1, double t2)
      : std::runtime_error(msg), delta_t1(t1), delta_t2(t2) {}
  double delta_t1;
  double delta_t2;
};

struct SearchResult {
  SearchTarget target = SearchTarget::cylinder;
  Params params;
  double delta_star = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  TypeId lo_label = TypeId::undetermined;
  TypeId hi_label = TypeId::undetermined;
  int iterations = 0;
  /// max(|x(s1)|, |theta(s1) - pi|) for the torus targets; NaN otherwise.
  double closure_error = std::numeric_limits<double>::quiet_NaN();
  /// Escape bounds the returned trajectory ran with. These equal the
  /// caller's r_max/x_max unless the cylinder search had to pull them
  /// inside the peel-off point to exhibit the escaping-wedge signature.
  double escape_r_bound = std::numeric_limits<double>::quiet_NaN();
  double escape_x_bound = std::numeric_limits<double>::quiet_NaN();
  /// Shot at delta_star integrated with the caller's controls.
  Trajectory trajectory;

  double bracket_width() const { return hi - lo; }
};

/// Classify each delta in order; per-row failures are recorded in the row
/// and never abort the sweep.
std::vector<SweepRow> sweep(const Params& params,
                            const std::vector<double>& deltas,
                            const IntegratorControls& controls);

/// Log-spaced seed grid in (1e-3 * R_lambda, (1 - 1e-3) * R_lambda).
std::vector<double> seed_deltas(const Params& params, std::size_t count = 64);

/// Locate delta_c, the supremum of the initial type-2 interval, by bisection
/// on the predicate "classify_delta = type2". Requires lambda < 0.
SearchResult find_cylinder_delta(const Params& params, double delta_tol,
                                 const IntegratorControls& controls);

/// Locate delta_t1 = inf{delta : type 1.1} and delta_t2 = sup{delta : type
/// 1.1}. Requires lambda <= 0; at lambda = 0 the type-1.1 set reaches down to
/// delta = 0 and both results report the single upper transition.
std::pair<SearchResult, SearchResult> find_torus_deltas(
    const Params& params, double delta_tol, const IntegratorControls& controls);

struct ScanRow {
  double lambda = 0.0;
  bool cylinder_found = false;
  bool tori_found = false;
  std::string cylinder_note;
  std::string tori_note;
};

struct ScanTable {
  int n = 2;
  std::vector<ScanRow> rows;
  /// Largest |lambda| in the grid with a successful search; numerical
  /// estimates (lower bounds), not the analytic constants.
  double c1_lower_estimate = 0.0;
  double c2_lower_estimate = 0.0;
};

/// Run both searches at coarse tolerance for every lambda in the grid.
/// The grid must be monotone and negative.
ScanTable lambda_threshold_scan(int n, const std::vector<double>& lambda_grid,
                                const IntegratorControls& controls);

/// JSON report {target, n, lambda, delta_star, bracket, iterations,
/// closure_error}.
std::string search_report_json(const SearchResult& result);

/// Classification CSV plus a trailing label column.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace lambdasurf

#endif
