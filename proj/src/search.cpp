#include "lambdasurf/search.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "lambdasurf/io.hpp"

#include <json.hpp>

namespace lambdasurf {

namespace {

constexpr double kPi = std::numbers::pi;

// One more integration attempt after tightening tolerances and pushing the
// escape surrogates out; classification near a critical delta needs the
// trajectory to track the escaping solution further before taking a side.
IntegratorControls escalate(IntegratorControls c) {
  c.rel_tol = std::max(c.rel_tol * 0.1, 3e-15);
  c.abs_tol = std::max(c.abs_tol * 0.1, 1e-16);
  c.r_max *= 4.0;
  c.x_max *= 4.0;
  c.s_max *= 2.0;
  return c;
}

struct Shot {
  TypeLabel label;
  EventSummary summary;
};

Shot classify_shot(double delta, const Params& params,
                   const IntegratorControls& controls) {
  Trajectory traj = integrate(delta, params, controls);
  EventSummary summary = summarize(traj);
  ClassifyOptions opts;
  opts.event_tol = controls.event_tol;
  return {label_from_summary(summary, opts), summary};
}

bool is_type1(TypeId id) {
  return id == TypeId::type1_1 || id == TypeId::type1_2 ||
         id == TypeId::type1_3;
}

}  // namespace

const char* to_string(SearchTarget target) {
  switch (target) {
    case SearchTarget::cylinder: return "cylinder";
    case SearchTarget::torus_lower: return "torus-lower";
    case SearchTarget::torus_upper: return "torus-upper";
  }
  return "?";
}

std::vector<double> seed_deltas(const Params& params, std::size_t count) {
  validate(params);
  double r_lambda = cylinder_radius(params);
  double lo = 1e-3 * r_lambda;
  double hi = (1.0 - 1e-3) * r_lambda;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out[i] = lo * std::pow(hi / lo, t);
  }
  return out;
}

std::vector<SweepRow> sweep(const Params& params,
                            const std::vector<double>& deltas,
                            const IntegratorControls& controls) {
  validate(params);
  controls.validate();
  std::vector<SweepRow> rows;
  rows.reserve(deltas.size());
  for (double d : deltas) {
    SweepRow row;
    row.delta = d;
    try {
      Shot shot = classify_shot(d, params, controls);
      row.label = shot.label.label;
      row.margin = shot.label.margin;
      row.summary = shot.summary;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

// Bisection driver. eval(delta) -> true when delta belongs with the low end.
// eval may throw PrecisionLimitError; the bracket it reports is patched by
// the caller.
struct BisectOutcome {
  double lo, hi;
  TypeId lo_label, hi_label;
  int iterations = 0;
};

template <class Eval>
BisectOutcome bisect(double lo, double hi, TypeId lo_label, TypeId hi_label,
                     double delta_tol, Eval&& eval) {
  BisectOutcome out{lo, hi, lo_label, hi_label, 0};
  while (out.hi - out.lo > delta_tol) {
    double mid = 0.5 * (out.lo + out.hi);
    if (!(mid > out.lo && mid < out.hi)) break;  // double resolution floor
    ++out.iterations;
    auto [low_side, label] = eval(mid, out.lo, out.hi);
    if (low_side) {
      out.lo = mid;
      out.lo_label = label;
    } else {
      out.hi = mid;
      out.hi_label = label;
    }
  }
  return out;
}

}  // namespace

SearchResult find_cylinder_delta(const Params& params, double delta_tol,
                                 const IntegratorControls& controls) {
  validate(params);
  controls.validate();
  if (!(params.lambda < 0.0))
    throw DomainError(
        "find_cylinder_delta shoots with lambda < 0 (the reported "
        "hypersurface carries the flipped sign)");
  if (!(delta_tol > 0.0)) throw DomainError("delta_tol must be positive");

  IntegratorControls fast = controls;
  fast.sample_mode = SampleMode::steps;

  auto rows = sweep(params, seed_deltas(params), fast);

  // Initial type-2 prefix; delta_c is its supremum.
  std::size_t i = 0;
  while (i < rows.size() && rows[i].ok() && rows[i].label == TypeId::type2) ++i;
  if (i == 0)
    throw NoBracketError(
        "no type-2 shots at the low end of (0, R_lambda); no bracket for "
        "delta_c",
        std::move(rows));
  std::size_t j = i;
  while (j < rows.size() && !(rows[j].ok() && is_type1(rows[j].label))) ++j;
  if (j == rows.size())
    throw NoBracketError(
        "no type-1 shots above the type-2 prefix; no bracket for delta_c",
        std::move(rows));

  double lo = rows[i - 1].delta;
  double hi = rows[j].delta;

  auto eval = [&](double mid, double cur_lo, double cur_hi)
      -> std::pair<bool, TypeId> {
    IntegratorControls c = fast;
    for (int esc = 0;; ++esc) {
      Shot shot = classify_shot(mid, params, c);
      if (shot.label.label == TypeId::type2) return {true, shot.label.label};
      if (is_type1(shot.label.label)) return {false, shot.label.label};
      if (esc == 3)
        throw PrecisionLimitError(
            "bisection for delta_c blocked by an undecidable shot at delta=" +
                fmt17(mid),
            cur_lo, cur_hi);
      c = escalate(c);
    }
  };

  BisectOutcome bo =
      bisect(lo, hi, TypeId::type2, rows[j].label, delta_tol, eval);

  SearchResult result;
  result.target = SearchTarget::cylinder;
  result.params = params;
  result.lo = bo.lo;
  result.hi = bo.hi;
  result.lo_label = bo.lo_label;
  result.hi_label = bo.hi_label;
  result.iterations = bo.iterations;
  result.delta_star = 0.5 * (bo.lo + bo.hi);
  result.trajectory = integrate(result.delta_star, params, controls);
  result.escape_r_bound = controls.r_max;
  result.escape_x_bound = controls.x_max;

  if (delta_tol < 1e-8) {
    auto escaping_wedge = [](const Trajectory& t) {
      if (!t.events.empty() || t.termination != Termination::escape)
        return false;
      for (const Sample& p : t.samples)
        if (p.s > 0.0 &&
            (!(p.theta > 0.0 && p.theta < kPi / 2) || !(p.theta_dot > 0.0)))
          return false;
      return true;
    };
    if (!escaping_wedge(result.trajectory)) {
      // The shot resolved (or budgeted out) before reaching the caller's
      // escape bounds: any delta a finite bracket away from delta_c peels
      // off the escaping solution eventually. Pull the bounds inside the
      // observed peel-off point and re-run the verification shot.
      const Trajectory& t = result.trajectory;
      double peel_s = t.events.empty() ? t.s_end() : t.events.front().s;
      ProfileState peel = t.state_at(peel_s);
      IntegratorControls verify = controls;
      verify.r_max = 0.75 * peel.r;
      verify.x_max = 0.75 * peel.x;
      bool shrunk = verify.r_max < controls.r_max * (1 - 1e-12) ||
                    verify.x_max < controls.x_max * (1 - 1e-12);
      if (shrunk && verify.r_max > cylinder_radius(params) &&
          verify.x_max > 0.0) {
        Trajectory vshot = integrate(result.delta_star, params, verify);
        if (escaping_wedge(vshot)) {
          result.trajectory = std::move(vshot);
          result.escape_r_bound = verify.r_max;
          result.escape_x_bound = verify.x_max;
          return result;
        }
      }
      throw PrecisionLimitError(
          "converged delta_c shot does not exhibit the escaping-wedge "
          "signature (escape bounds r_max=" +
              fmt17(controls.r_max) + ", x_max=" + fmt17(controls.x_max) +
              ", peel-off near s=" + fmt17(peel_s) + ")",
          bo.lo, bo.hi);
    }
  }
  return result;
}

namespace {

// Side of the torus boundary: true when the shot closes across x = 0 before
// theta reaches pi (x(s1) < 0, the type-1.1 interior).
std::pair<bool, TypeId> torus_interior_side(double mid, const Params& params,
                                            const IntegratorControls& fast,
                                            double cur_lo, double cur_hi) {
  IntegratorControls c = fast;
  for (int esc = 0;; ++esc) {
    Shot shot = classify_shot(mid, params, c);
    const EventSummary& sm = shot.summary;
    if (sm.s1_resolved()) return {sm.x_at_s1 < 0.0, shot.label.label};
    if (!sm.s4_resolved()) return {false, shot.label.label};  // x > 0 all along
    if (esc == 3)
      throw PrecisionLimitError(
          "torus bisection blocked by an undecidable shot at delta=" +
              fmt17(mid),
          cur_lo, cur_hi);
    c = escalate(c);
  }
}

SearchResult finish_torus_result(SearchTarget target, const Params& params,
                                 const BisectOutcome& bo,
                                 const IntegratorControls& controls,
                                 double delta_tol) {
  SearchResult result;
  result.target = target;
  result.params = params;
  result.lo = bo.lo;
  result.hi = bo.hi;
  result.lo_label = bo.lo_label;
  result.hi_label = bo.hi_label;
  result.iterations = bo.iterations;
  result.delta_star = 0.5 * (bo.lo + bo.hi);
  result.trajectory = integrate(result.delta_star, params, controls);
  result.escape_r_bound = controls.r_max;
  result.escape_x_bound = controls.x_max;

  EventSummary summary = summarize(result.trajectory);
  if (!summary.s1_resolved())
    throw PrecisionLimitError(
        "converged torus shot did not resolve s1", bo.lo, bo.hi);
  if (std::fabs(summary.theta_at_s1 - kPi) > 0.1)
    // theta(s1) near 0: the type-1.1 boundary abuts the type-2/type-3
    // critical point closer than delta_tol, so the closed profile sits
    // below the reachable delta resolution.
    throw PrecisionLimitError(
        "type-1.1 boundary is pinched against the type-2 region within "
        "delta_tol; no closed profile resolvable at this precision",
        bo.lo, bo.hi);
  result.closure_error = std::max(std::fabs(summary.x_at_s1),
                                  std::fabs(summary.theta_at_s1 - kPi));
  // The closure error scales with the final bracket; anything beyond the
  // classify band means the bisection did not actually straddle a closed
  // profile.
  if (result.closure_error > 1e-4)
    throw PrecisionLimitError(
        "converged torus shot fails the type-1.2 closure conditions "
        "(closure error " +
            fmt17(result.closure_error) + " at delta_tol " + fmt17(delta_tol) +
            ")",
        bo.lo, bo.hi);
  return result;
}

}  // namespace

std::pair<SearchResult, SearchResult> find_torus_deltas(
    const Params& params, double delta_tol,
    const IntegratorControls& controls) {
  validate(params);
  controls.validate();
  if (params.lambda > 0.0)
    throw DomainError("find_torus_deltas requires lambda <= 0");
  if (!(delta_tol > 0.0)) throw DomainError("delta_tol must be positive");

  IntegratorControls fast = controls;
  fast.sample_mode = SampleMode::steps;

  auto rows = sweep(params, seed_deltas(params), fast);

  auto is_11 = [](const SweepRow& r) {
    return r.ok() && r.label == TypeId::type1_1;
  };
  auto first_it = std::find_if(rows.begin(), rows.end(), is_11);
  if (first_it == rows.end())
    throw NoBracketError("no type-1.1 shots in the seed sweep",
                         std::move(rows));
  std::size_t first = static_cast<std::size_t>(first_it - rows.begin());
  std::size_t last = first;
  for (std::size_t k = first; k < rows.size(); ++k)
    if (is_11(rows[k])) last = k;

  // Upper transition: sup{delta : type 1.1}.
  std::size_t above = last + 1;
  while (above < rows.size() && !(rows[above].ok() && !is_11(rows[above])))
    ++above;
  if (above == rows.size())
    throw NoBracketError(
        "type-1.1 shots extend to the top of the seed sweep; no bracket for "
        "delta_t2",
        std::move(rows));

  auto eval = [&](double mid, double cur_lo, double cur_hi) {
    return torus_interior_side(mid, params, fast, cur_lo, cur_hi);
  };
  // For the upper transition the interior (x(s1) < 0) is the low end.
  auto eval_upper = [&](double mid, double cur_lo, double cur_hi)
      -> std::pair<bool, TypeId> {
    auto [interior, label] = eval(mid, cur_lo, cur_hi);
    return {interior, label};
  };
  BisectOutcome upper =
      bisect(rows[last].delta, rows[above].delta, rows[last].label,
             rows[above].label, delta_tol, eval_upper);
  SearchResult upper_result = finish_torus_result(
      SearchTarget::torus_upper, params, upper, controls, delta_tol);

  // Lower transition: inf{delta : type 1.1}. When the 1.1 set reaches the
  // bottom of the sweep (lambda = 0) the infimum degenerates and both
  // results report the single upper transition.
  std::size_t below = first;
  bool have_lower = false;
  while (below > 0) {
    --below;
    if (rows[below].ok() && !is_11(rows[below])) {
      have_lower = true;
      break;
    }
  }

  if (!have_lower) {
    SearchResult lower_result = upper_result;
    lower_result.target = SearchTarget::torus_lower;
    return {std::move(lower_result), std::move(upper_result)};
  }

  auto eval_lower = [&](double mid, double cur_lo, double cur_hi)
      -> std::pair<bool, TypeId> {
    auto [interior, label] = eval(mid, cur_lo, cur_hi);
    return {!interior, label};  // exterior side sits at the low end
  };
  BisectOutcome lower =
      bisect(rows[below].delta, rows[first].delta, rows[below].label,
             rows[first].label, delta_tol, eval_lower);
  SearchResult lower_result = finish_torus_result(
      SearchTarget::torus_lower, params, lower, controls, delta_tol);

  if (upper_result.delta_star - lower_result.delta_star < 10.0 * delta_tol)
    throw DistinctRootsError(
        "delta_t1 and delta_t2 did not separate: " +
            fmt17(lower_result.delta_star) + " vs " +
            fmt17(upper_result.delta_star),
        lower_result.delta_star, upper_result.delta_star);

  return {std::move(lower_result), std::move(upper_result)};
}

ScanTable lambda_threshold_scan(int n, const std::vector<double>& lambda_grid,
                                const IntegratorControls& controls) {
  if (n < 2) throw DomainError("lambda_threshold_scan requires n >= 2");
  bool ascending = true, descending = true;
  for (std::size_t i = 0; i + 1 < lambda_grid.size(); ++i) {
    if (lambda_grid[i] > lambda_grid[i + 1]) ascending = false;
    if (lambda_grid[i] < lambda_grid[i + 1]) descending = false;
  }
  if (!ascending && !descending)
    throw DomainError("lambda grid must be sorted");
  for (double l : lambda_grid)
    if (!(l < 0.0))
      throw DomainError("lambda grid entries must be negative (the shooting "
                        "convention)");

  constexpr double kCoarseTol = 1e-10;
  ScanTable table;
  table.n = n;
  for (double lambda : lambda_grid) {
    Params p{n, lambda};
    ScanRow row;
    row.lambda = lambda;
    IntegratorControls c = IntegratorControls::defaults_for(p);
    c.rel_tol = controls.rel_tol;
    c.abs_tol = controls.abs_tol;
    c.event_tol = controls.event_tol;
    c.sample_mode = SampleMode::steps;
    try {
      find_cylinder_delta(p, kCoarseTol, c);
      row.cylinder_found = true;
    } catch (const std::exception& e) {
      row.cylinder_note = e.what();
    }
    try {
      find_torus_deltas(p, kCoarseTol, c);
      row.tori_found = true;
    } catch (const std::exception& e) {
      row.tori_note = e.what();
    }
    if (row.cylinder_found)
      table.c1_lower_estimate =
          std::max(table.c1_lower_estimate, std::fabs(lambda));
    if (row.tori_found)
      table.c2_lower_estimate =
          std::max(table.c2_lower_estimate, std::fabs(lambda));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string search_report_json(const SearchResult& result) {
  nlohmann::ordered_json j;
  j["target"] = to_string(result.target);
  j["n"] = result.params.n;
  j["lambda"] = result.params.lambda;
  j["delta_star"] = result.delta_star;
  j["bracket"] = {result.lo, result.hi};
  j["iterations"] = result.iterations;
  if (std::isfinite(result.closure_error))
    j["closure_error"] = result.closure_error;
  else
    j["closure_error"] = nullptr;
  return j.dump(2);
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "delta,label,s1,s2,s3,s4,b,margin\n";
  for (const SweepRow& row : rows) {
    if (!row.ok()) {
      os << fmt17(row.delta) << ",error,nan,nan,nan,nan,nan,nan\n";
      continue;
    }
    write_classification_row(os, row.delta, {row.label, row.margin},
                             row.summary);
  }
}

}  // namespace lambdasurf
