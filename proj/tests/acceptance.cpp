// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Golden parameters are two-run oracle values (see test_search.cpp).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lambdasurf/classify.hpp"
#include "lambdasurf/formulations.hpp"
#include "lambdasurf/geometry.hpp"
#include "lambdasurf/search.hpp"

using namespace lambdasurf;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

#define EXPECT(cond, what)                                   \
  do {                                                       \
    if (!(cond)) {                                           \
      out.pass = false;                                      \
      out.detail << " [" << what << " at line " << __LINE__ << "]"; \
    }                                                        \
  } while (0)

IntegratorControls steps_controls(const Params& p) {
  auto c = IntegratorControls::defaults_for(p);
  c.sample_mode = SampleMode::steps;
  return c;
}

double max_abs_residual(const std::vector<CurvatureSample>& samples) {
  double worst = 0.0;
  for (const auto& c : samples) worst = std::max(worst, std::fabs(c.residual));
  return worst;
}

// 1. Exact families: plane, sphere, cylinder residuals < 1e-10.
Outcome criterion1() {
  Outcome out;
  double worst = 0.0;
  for (int n : {2, 3}) {
    for (double lambda : {-0.4, -0.24, 0.0, 0.4}) {
      Params p{n, lambda};
      worst = std::max(worst, max_abs_residual(curvature_profile(
                                  exact_plane_curve(p, 0.1, 6.0, 1000), p)));
      worst = std::max(worst, max_abs_residual(curvature_profile(
                                  exact_sphere_curve(p, 1000), p)));
      worst = std::max(worst, max_abs_residual(curvature_profile(
                                  exact_cylinder_curve(p, 10.0, 1000), p)));
    }
  }
  out.detail << "max residual " << worst;
  EXPECT(worst < 1e-10, "residual over budget");
  return out;
}

// 2. Oracle equivalence on random shots: second-order decay, final < 1e-5.
Outcome criterion2() {
  Outcome out;
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> lam_dist(-0.5, 0.0);
  std::uniform_real_distribution<double> del_dist(0.1, 0.9);
  double worst_final = 0.0, worst_ratio = 1e9, best_ratio = 0.0;
  for (int k = 0; k < 10; ++k) {
    Params p{2 + (k % 2), lam_dist(rng)};
    double delta = del_dist(rng) * cylinder_radius(p);
    auto c = IntegratorControls::defaults_for(p);
    c.sample_spacing = 8e-4;
    Trajectory coarse = integrate(delta, p, c);
    c.sample_spacing = 4e-4;
    Trajectory fine = integrate(delta, p, c);
    double dc = cross_validate(coarse, 1e-5);
    double df = cross_validate(fine, 1e-5);
    worst_final = std::max(worst_final, df);
    worst_ratio = std::min(worst_ratio, dc / df);
    best_ratio = std::max(best_ratio, dc / df);
  }
  out.detail << "final defect " << worst_final << ", decay ratios ["
             << worst_ratio << ", " << best_ratio << "]";
  EXPECT(worst_final < 1e-5, "final defect over budget");
  EXPECT(worst_ratio > 2.5, "decay slower than second order");
  EXPECT(best_ratio < 6.5, "decay inconsistent with second order");
  return out;
}

// 3. Self-shrinker regression at lambda = 0: every shot is type 1.
Outcome criterion3() {
  Outcome out;
  Params p{2, 0.0};
  double R = std::sqrt(1.0);  // sqrt(n-1)
  std::vector<double> deltas(50);
  for (int i = 0; i < 50; ++i)
    deltas[i] = R * (0.02 + (0.99 - 0.02) * i / 49.0);
  auto rows = sweep(p, deltas, steps_controls(p));
  int transitions = 0;
  int prev_rank = 0;
  auto rank = [](TypeId id) {
    switch (id) {
      case TypeId::type1_1: return 1;
      case TypeId::type1_2: return 2;
      case TypeId::type1_3: return 3;
      default: return 0;
    }
  };
  for (const auto& row : rows) {
    EXPECT(row.ok(), "row error");
    int r = rank(row.label);
    EXPECT(r > 0, "non-type-1 label in the sweep");
    EXPECT(r >= prev_rank, "sub-type not monotone");
    if (prev_rank != 0 && r != prev_rank) ++transitions;
    prev_rank = r;
  }
  out.detail << transitions << " sub-type transitions over 50 deltas";
  EXPECT(transitions <= 2, "more than two transition bands");
  return out;
}

// 4. Cylinder-type critical shot (lambda = -0.4).
Outcome criterion4() {
  Outcome out;
  Params p{2, -0.4};
  auto res = find_cylinder_delta(p, 1e-10, steps_controls(p));
  out.detail << "delta_c " << res.delta_star << ", bracket "
             << res.bracket_width() << ", escape bounds (" << res.escape_r_bound
             << ", " << res.escape_x_bound << ")";
  EXPECT(res.bracket_width() < 1e-10, "bracket too wide");

  const Trajectory& t = res.trajectory;
  EXPECT(t.termination == Termination::escape, "no escape");
  EXPECT(t.samples.back().r > res.escape_r_bound, "r bound not exceeded");
  EXPECT(std::fabs(t.samples.back().x) > res.escape_x_bound,
         "x bound not exceeded");
  for (const Sample& q : t.samples)
    if (q.s > 0.0 &&
        (!(q.theta > 0.0 && q.theta < kPi / 2) || !(q.theta_dot > 0.0))) {
      EXPECT(false, "wedge signature violated");
      break;
    }

  auto curv = curvature_profile(curve_from_trajectory(t), p);
  apply_normal_flip(curv);  // report as a (+0.4)-hypersurface
  EXPECT(!convexity_check(curv).is_convex, "flipped shot not non-convex");

  auto alt = steps_controls(p);
  alt.rel_tol = 3e-13;
  alt.abs_tol = 3e-13;
  alt.initial_step = 3e-5;
  alt.step_safety = 0.8;
  auto res_b = find_cylinder_delta(p, 1e-10, alt);
  out.detail << ", two-run gap " << std::fabs(res.delta_star - res_b.delta_star);
  EXPECT(std::fabs(res.delta_star - res_b.delta_star) < 1e-8,
         "two-run oracle disagrees");
  return out;
}

// 5. Two tori at lambda = -0.24.
Outcome criterion5() {
  Outcome out;
  Params p{2, -0.24};
  auto [t1, t2] = find_torus_deltas(p, 1e-12, IntegratorControls::defaults_for(p));
  out.detail << "delta_t1 " << t1.delta_star << ", delta_t2 " << t2.delta_star
             << ", closures " << t1.closure_error << "/" << t2.closure_error;
  EXPECT(t1.delta_star < t2.delta_star, "deltas not ordered");
  EXPECT(t1.closure_error < 1e-6, "lower closure over budget");
  EXPECT(t2.closure_error < 1e-6, "upper closure over budget");

  auto span = [](const ProfileCurve& curve) {
    double lo = 1e300, hi = -1e300;
    for (const auto& q : curve.points) {
      lo = std::min(lo, q.r);
      hi = std::max(hi, q.r);
    }
    return std::pair{lo, hi};
  };
  ProfileCurve c1 = reflect_close(t1.trajectory);
  ProfileCurve c2 = reflect_close(t2.trajectory);
  auto [lo1, hi1] = span(c1);
  auto [lo2, hi2] = span(c2);
  EXPECT(std::fabs(lo1 - lo2) > 1e-3, "min-r ranges not distinct");
  EXPECT(std::fabs(hi1 - hi2) > 1e-3, "max-r ranges not distinct");

  for (const ProfileCurve* curve : {&c1, &c2}) {
    TriangleMesh mesh = revolve_mesh(resample(*curve, 513), 64);
    EXPECT(is_watertight(mesh), "mesh not watertight");
    EXPECT(euler_characteristic(mesh) == 0, "Euler characteristic not 0");
  }
  return out;
}

// 6. Radius bounds over a 100-shot grid.
Outcome criterion6(std::vector<Trajectory>& grid_shots) {
  Outcome out;
  int violations = 0, resolved = 0;
  for (double lambda : {0.0, -0.1, -0.24, -0.4}) {
    Params p{2, lambda};
    auto c = steps_controls(p);
    double R = cylinder_radius(p);
    for (int i = 0; i < 25; ++i) {
      double delta = R * (0.03 + (0.97 - 0.03) * i / 24.0);
      Trajectory t = integrate(delta, p, c);
      grid_shots.push_back(t);
      EventSummary s = summarize(t);
      auto rep = check_radius_bounds(s, p);
      if (!rep.applicable) continue;
      ++resolved;
      for (const auto& chk : rep.checks)
        if (!chk.satisfied) ++violations;
    }
  }
  out.detail << resolved << " resolved shots, " << violations << " violations";
  EXPECT(resolved >= 90, "too few resolved shots");
  EXPECT(violations == 0, "radius bound violated");
  return out;
}

// 7. Lemma suite on the f-graph arcs of the criterion-6 grid.
Outcome criterion7(const std::vector<Trajectory>& grid_shots) {
  Outcome out;
  std::size_t arcs = 0, violations = 0;
  for (const Trajectory& t : grid_shots) {
    auto arc = f_graph_from_trajectory(t);
    if (arc.size() < 16) continue;
    ++arcs;
    double f2_scale = 0.0;
    for (const auto& q : arc) f2_scale = std::max(f2_scale, std::fabs(q.f2));
    double guard = 1e-7 * std::max(1.0, f2_scale);
    violations += check_sign_propagation(arc, guard).size();
    violations += check_single_inflection(arc, guard).size();
    violations += check_inflection_slope(arc, 1e-6).size();
  }
  out.detail << arcs << " arcs checked, " << violations << " violations";
  EXPECT(arcs >= 90, "too few f-graph arcs");
  EXPECT(violations == 0, "lemma violated");
  return out;
}

// 8. Rescaled small-delta convergence.
Outcome criterion8() {
  Outcome out;
  Params p{2, -0.24};
  double sup[3];
  double deltas[3] = {0.1, 0.05, 0.025};
  for (int k = 0; k < 3; ++k) {
    auto states = integrate_rescaled(deltas[k], p, 2.0, 2000);
    double worst = 0.0;
    for (const auto& st : states)
      worst = std::max(worst,
                       std::fabs(st.rho - (std::sqrt(1.0 + st.t * st.t) - 1.0)));
    sup[k] = worst;
  }
  double r1 = sup[0] / sup[1], r2 = sup[1] / sup[2];
  out.detail << "sup gaps " << sup[0] << "/" << sup[1] << "/" << sup[2]
             << ", ratios " << r1 << ", " << r2;
  EXPECT(r1 > 1.7 && r1 < 2.3, "first halving ratio outside [1.7, 2.3]");
  EXPECT(r2 > 1.7 && r2 < 2.3, "second halving ratio outside [1.7, 2.3]");

  double worst_inv = 0.0;
  for (double t = 0.1; t <= 2.0; t += 0.1) {
    double rho = limit_profile_rho_of_t(t, p);
    worst_inv =
        std::max(worst_inv, std::fabs(rho - (std::sqrt(1.0 + t * t) - 1.0)));
  }
  out.detail << ", inversion gap " << worst_inv;
  EXPECT(worst_inv < 1e-8, "closed-form inversion over budget");
  return out;
}

// 9. CLI determinism on the criterion-4/5 invocations.
Outcome criterion9() {
  Outcome out;
#ifndef LSURF_CLI_PATH
  EXPECT(false, "CLI path not configured");
#else
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  auto run_pair = [&](const std::string& args, const std::string& tag) {
    fs::path d1 = fs::temp_directory_path() / ("lsurf_acc_" + tag + "_1");
    fs::path d2 = fs::temp_directory_path() / ("lsurf_acc_" + tag + "_2");
    fs::remove_all(d1);
    fs::remove_all(d2);
    std::string base = std::string(LSURF_CLI_PATH) + " " + args;
    int rc1 = std::system((base + " --out " + d1.string() + " > /dev/null 2>&1").c_str());
    int rc2 = std::system((base + " --out " + d2.string() + " > /dev/null 2>&1").c_str());
    EXPECT(WEXITSTATUS(rc1) == 0 && WEXITSTATUS(rc2) == 0, tag + " run failed");
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(d1)) {
      ++files;
      fs::path other = d2 / entry.path().filename();
      EXPECT(fs::exists(other), tag + " missing file");
      EXPECT(slurp(entry.path()) == slurp(other),
             tag + " byte mismatch in " + entry.path().filename().string());
    }
    EXPECT(files >= 3, tag + " produced too few files");
  };
  run_pair("find-cylinder --n 2 --lambda -0.4 --tol 1e-10 --r-max 5 --x-max 1.5",
           "cyl");
  run_pair(
      "find-torus --n 2 --lambda -0.24 --tol 1e-12 --profile-points 257 "
      "--segments 32",
      "torus");
#endif
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> fn;
  };

  std::vector<Trajectory> grid_shots;
  std::vector<Criterion> criteria = {
      {1, "exact families satisfy the defining equation", 1.0, criterion1},
      {2, "graph-equation oracle equivalence", 10.0, criterion2},
      {3, "self-shrinker sweep is all type 1 (1.1 -> 1.3)", 30.0, criterion3},
      {4, "critical cylinder shot (lambda = -0.4)", 60.0, criterion4},
      {5, "two non-congruent tori (lambda = -0.24)", 120.0, criterion5},
      {6, "radius bounds on a 100-shot grid", 60.0,
       [&] { return criterion6(grid_shots); }},
      {7, "f-graph lemma suite on the same grid", 60.0,
       [&] { return criterion7(grid_shots); }},
      {8, "rescaled small-delta convergence", 10.0, criterion8},
      {9, "CLI determinism", 300.0, criterion9},
  };

  int failures = 0;
  for (auto& c : criteria) {
    auto t0 = Clock::now();
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " [exception: " << e.what() << "]";
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    bool in_budget = secs < c.budget_s;
    bool pass = out.pass && in_budget;
    if (!pass) ++failures;
    std::printf("[%s] criterion %d: %s — %s (%.2f s%s)\n",
                pass ? "PASS" : "FAIL", c.id, c.name, out.detail.str().c_str(),
                secs, in_budget ? "" : ", OVER BUDGET");
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
