#include "lambdasurf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <unordered_map>

#include "lambdasurf/io.hpp"
#include "rk45.hpp"

namespace lambdasurf {

namespace {

constexpr double kPi = std::numbers::pi;

using detail::HermiteSpan;
using detail::Vec3;

// Hermite evaluation of (x, r, theta) and d(theta)/ds between curve points.
Sample eval_between(const Sample& a, const Sample& b, double s) {
  HermiteSpan span;
  span.s0 = a.s;
  span.h = b.s - a.s;
  span.y0 = {a.x, a.r, a.theta};
  span.y1 = {b.x, b.r, b.theta};
  span.f0 = {std::cos(a.theta), std::sin(a.theta), a.theta_dot};
  span.f1 = {std::cos(b.theta), std::sin(b.theta), b.theta_dot};
  Vec3 y = span.eval(s);
  // Derivative of the theta cubic.
  double t = (s - a.s) / span.h;
  double d00 = (6 * t * t - 6 * t) / span.h;
  double d10 = 3 * t * t - 4 * t + 1;
  double d01 = -d00;
  double d11 = 3 * t * t - 2 * t;
  double dtheta = d00 * a.theta + d10 * a.theta_dot * 1.0 + d01 * b.theta +
                  d11 * b.theta_dot;
  // d00/d01 already divided by h; Hermite tangent terms carry h * f, so the
  // derivative contributions of f terms are d10 * f0 + d11 * f1.
  return {s, y[0], y[1], y[2], dtheta};
}

}  // namespace

ProfileCurve curve_from_trajectory(const Trajectory& traj) {
  validate(traj.params);
  ProfileCurve curve;
  curve.params = traj.params;
  curve.points = traj.samples;
  curve.source_delta = traj.delta;
  return curve;
}

bool is_simple(const ProfileCurve& curve, double exclusion_band) {
  const auto& p = curve.points;
  const std::size_t n_seg = p.size() >= 2 ? p.size() - 1 : 0;
  if (n_seg < 3) return true;

  double max_len = 0.0;
  for (std::size_t i = 0; i < n_seg; ++i)
    max_len = std::max(max_len, std::hypot(p[i + 1].x - p[i].x,
                                           p[i + 1].r - p[i].r));
  if (max_len == 0.0) return true;
  const double cell = max_len * 1.5;

  auto key = [cell](double x, double r) {
    return std::pair<long long, long long>{
        static_cast<long long>(std::floor(x / cell)),
        static_cast<long long>(std::floor(r / cell))};
  };

  std::map<std::pair<long long, long long>, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < n_seg; ++i) {
    auto [ax, ar] = key(p[i].x, p[i].r);
    auto [bx, br] = key(p[i + 1].x, p[i + 1].r);
    for (long long cx = std::min(ax, bx); cx <= std::max(ax, bx); ++cx)
      for (long long cr = std::min(ar, br); cr <= std::max(ar, br); ++cr)
        grid[{cx, cr}].push_back(i);
  }

  auto cross = [](double ox, double oy, double ax, double ay, double bx,
                  double by) {
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
  };
  auto proper_intersect = [&](std::size_t i, std::size_t j) {
    const Sample &a = p[i], &b = p[i + 1], &c = p[j], &d = p[j + 1];
    double d1 = cross(c.x, c.r, d.x, d.r, a.x, a.r);
    double d2 = cross(c.x, c.r, d.x, d.r, b.x, b.r);
    double d3 = cross(a.x, a.r, b.x, b.r, c.x, c.r);
    double d4 = cross(a.x, a.r, b.x, b.r, d.x, d.r);
    return ((d1 > 0) != (d2 > 0)) && (d1 != 0 || d2 != 0) &&
           ((d3 > 0) != (d4 > 0)) && (d3 != 0 || d4 != 0);
  };

  auto adjacent = [&](std::size_t i, std::size_t j) {
    std::size_t lo = std::min(i, j), hi = std::max(i, j);
    if (hi - lo <= 1) return true;
    if (curve.closed && lo == 0 && hi == n_seg - 1) return true;
    // Segments whose endpoints coincide within the exclusion band count as
    // adjacent (the reflection junction).
    double dx = p[hi].x - p[lo + 1].x;
    double dr = p[hi].r - p[lo + 1].r;
    return std::hypot(dx, dr) < exclusion_band;
  };

  for (const auto& [cell_key, segs] : grid) {
    for (std::size_t a = 0; a < segs.size(); ++a)
      for (std::size_t b = a + 1; b < segs.size(); ++b) {
        std::size_t i = segs[a], j = segs[b];
        if (adjacent(i, j)) continue;
        if (proper_intersect(i, j)) return false;
      }
  }
  return true;
}

ProfileCurve reflect_close(const Trajectory& traj, double closure_tol) {
  validate(traj.params);
  if (traj.samples.size() < 3)
    throw NotClosableError("trajectory too short to close", 0.0, 0.0);

  const Sample& end = traj.samples.back();
  const double s1 = end.s;
  const double x_close = std::fabs(end.x);
  const double theta_err = std::fabs(end.theta - kPi);
  if (traj.termination != Termination::event_stop ||
      traj.find_event(EventKind::theta_pi) == nullptr || x_close > closure_tol ||
      theta_err > closure_tol)
    throw NotClosableError(
        "shot is not a converged type-1.2 curve: |x(s1)| = " + fmt17(x_close) +
            ", |theta(s1) - pi| = " + fmt17(theta_err),
        x_close, theta_err);

  ProfileCurve curve;
  curve.params = traj.params;
  curve.source_delta = traj.delta;
  curve.closed = true;
  curve.closure_error = std::max(x_close, theta_err * end.r);
  curve.points = traj.samples;
  curve.points.reserve(2 * traj.samples.size());
  for (std::size_t k = traj.samples.size() - 1; k-- > 0;) {
    const Sample& q = traj.samples[k];
    curve.points.push_back(
        {2.0 * s1 - q.s, -q.x, q.r, 2.0 * kPi - q.theta, q.theta_dot});
  }

  if (!is_simple(curve, std::max(10.0 * 1e-12, 10.0 * curve.closure_error)))
    throw NotClosableError("doubled profile curve self-intersects", x_close,
                           theta_err);
  return curve;
}

ProfileCurve resample(const ProfileCurve& curve, std::size_t max_points) {
  if (max_points < 2) throw DomainError("resample requires max_points >= 2");
  if (curve.points.size() <= max_points) return curve;

  ProfileCurve out;
  out.params = curve.params;
  out.closed = curve.closed;
  out.closure_error = curve.closure_error;
  out.source_delta = curve.source_delta;
  out.points.reserve(max_points);

  const auto& p = curve.points;
  double s0 = p.front().s, s1 = p.back().s;
  std::size_t idx = 0;
  for (std::size_t k = 0; k < max_points; ++k) {
    double s = s0 + (s1 - s0) * static_cast<double>(k) / (max_points - 1);
    while (idx + 2 < p.size() && p[idx + 1].s <= s) ++idx;
    if (k == 0)
      out.points.push_back(p.front());
    else if (k == max_points - 1)
      out.points.push_back(p.back());
    else
      out.points.push_back(eval_between(p[idx], p[idx + 1], s));
  }
  return out;
}

std::vector<CurvatureSample> curvature_profile(const ProfileCurve& curve,
                                               const Params& params) {
  validate(params);
  std::vector<CurvatureSample> out;
  out.reserve(curve.points.size());
  for (const Sample& p : curve.points) {
    if (!(p.r > 0.0)) throw DomainError("curvature_profile requires r > 0");
    double ct = std::cos(p.theta);
    double st = std::sin(p.theta);
    double kappa_rot = -ct / p.r;
    double kappa_prof = p.theta_dot;
    double H = kappa_prof + (params.n - 1) * kappa_rot;
    double residual =
        p.theta_dot -
        (((params.n - 1) / p.r - p.r) * ct + p.x * st + params.lambda);
    out.push_back({p.s, kappa_rot, kappa_prof, H, residual});
  }
  return out;
}

void apply_normal_flip(std::vector<CurvatureSample>& samples) {
  for (auto& c : samples) {
    c.kappa_rot = -c.kappa_rot;
    c.kappa_prof = -c.kappa_prof;
    c.H = -c.H;
    c.residual = -c.residual;
  }
}

namespace {

std::string condensed_signs(const std::vector<CurvatureSample>& samples,
                            double CurvatureSample::*member) {
  std::string out;
  for (const auto& c : samples) {
    double v = c.*member;
    char s = v > 0.0 ? '+' : (v < 0.0 ? '-' : '0');
    if (out.empty() || out.back() != s) out.push_back(s);
  }
  return out;
}

}  // namespace

ConvexityReport convexity_check(const std::vector<CurvatureSample>& samples) {
  ConvexityReport report;
  report.rot_pattern = condensed_signs(samples, &CurvatureSample::kappa_rot);
  report.prof_pattern = condensed_signs(samples, &CurvatureSample::kappa_prof);
  bool all_nonneg = true, all_nonpos = true;
  for (const auto& c : samples) {
    if (c.kappa_rot < 0.0 || c.kappa_prof < 0.0) all_nonneg = false;
    if (c.kappa_rot > 0.0 || c.kappa_prof > 0.0) all_nonpos = false;
  }
  report.is_convex = all_nonneg || all_nonpos;
  return report;
}

TriangleMesh revolve_mesh(const ProfileCurve& curve, int segments) {
  validate(curve.params);
  if (curve.params.n != 2)
    throw UnsupportedDimensionError(
        "mesh export is defined for n = 2 only; higher-dimensional profiles "
        "export as CSV");
  if (segments < 3) throw DomainError("revolve_mesh requires segments >= 3");
  if (curve.points.size() < 2)
    throw DomainError("revolve_mesh requires at least 2 profile points");

  // Closed curves are welded at the seam: the duplicated end point is
  // dropped and rings wrap around.
  std::size_t rings = curve.points.size() - (curve.closed ? 1 : 0);
  const int S = segments;

  TriangleMesh mesh;
  mesh.vertices.reserve(rings * S);
  mesh.normals.reserve(rings * S);
  for (std::size_t i = 0; i < rings; ++i) {
    const Sample& p = curve.points[i];
    double ct = std::cos(p.theta), st = std::sin(p.theta);
    for (int j = 0; j < S; ++j) {
      double phi = 2.0 * kPi * j / S;
      double cp = std::cos(phi), sp = std::sin(phi);
      mesh.vertices.push_back({p.x, p.r * cp, p.r * sp});
      mesh.normals.push_back({-st, ct * cp, ct * sp});
    }
  }

  auto vid = [S](std::size_t i, int j) {
    return static_cast<int>(i) * S + (j % S);
  };
  std::size_t bands = curve.closed ? rings : rings - 1;
  mesh.faces.reserve(2 * bands * S);
  for (std::size_t i = 0; i < bands; ++i) {
    std::size_t i2 = (i + 1) % rings;
    for (int j = 0; j < S; ++j) {
      int a = vid(i, j), b = vid(i2, j), c = vid(i2, j + 1), d = vid(i, j + 1);
      mesh.faces.push_back({a, c, b});
      mesh.faces.push_back({a, d, c});
    }
  }
  return mesh;
}

bool is_watertight(const TriangleMesh& mesh) {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      int a = f[e], b = f[(e + 1) % 3];
      if (a == b) return false;
      if (++directed[{a, b}] > 1) return false;  // non-manifold
    }
  }
  for (const auto& [edge, count] : directed) {
    auto rev = directed.find({edge.second, edge.first});
    if (rev == directed.end() || rev->second != count) return false;
  }
  return true;
}

int euler_characteristic(const TriangleMesh& mesh) {
  std::map<std::pair<int, int>, int> undirected;
  for (const auto& f : mesh.faces)
    for (int e = 0; e < 3; ++e) {
      int a = f[e], b = f[(e + 1) % 3];
      undirected[{std::min(a, b), std::max(a, b)}] = 1;
    }
  return static_cast<int>(mesh.vertices.size()) -
         static_cast<int>(undirected.size()) +
         static_cast<int>(mesh.faces.size());
}

void write_obj(std::ostream& os, const TriangleMesh& mesh) {
  for (const auto& v : mesh.vertices)
    os << "v " << fmt9(v[0]) << ' ' << fmt9(v[1]) << ' ' << fmt9(v[2]) << '\n';
  for (const auto& n : mesh.normals)
    os << "vn " << fmt9(n[0]) << ' ' << fmt9(n[1]) << ' ' << fmt9(n[2])
       << '\n';
  for (const auto& f : mesh.faces)
    os << "f " << f[0] + 1 << "//" << f[0] + 1 << ' ' << f[1] + 1 << "//"
       << f[1] + 1 << ' ' << f[2] + 1 << "//" << f[2] + 1 << '\n';
}

void write_profile_csv(std::ostream& os, const ProfileCurve& curve,
                       const Params& params, bool flipped) {
  auto curv = curvature_profile(curve, params);
  if (flipped) apply_normal_flip(curv);
  os << "s,x,r,theta,theta_dot,kappa_rot,kappa_prof,H,residual\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const Sample& p = curve.points[i];
    const CurvatureSample& c = curv[i];
    os << fmt17(p.s) << ',' << fmt17(p.x) << ',' << fmt17(p.r) << ','
       << fmt17(p.theta) << ',' << fmt17(p.theta_dot) << ',' << fmt17(c.kappa_rot)
       << ',' << fmt17(c.kappa_prof) << ',' << fmt17(c.H) << ','
       << fmt17(c.residual) << '\n';
  }
}

ProfileCurve exact_cylinder_curve(const Params& params, double length,
                                  std::size_t n_points) {
  validate(params);
  if (!(length > 0.0) || n_points < 2)
    throw DomainError("exact_cylinder_curve requires length > 0, n_points >= 2");
  double R = cylinder_radius(params);
  ProfileCurve curve;
  curve.params = params;
  curve.source_delta = R;
  curve.points.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    double s = length * static_cast<double>(i) / (n_points - 1);
    curve.points.push_back({s, s, R, 0.0, 0.0});
  }
  return curve;
}

ProfileCurve exact_sphere_curve(const Params& params, std::size_t n_points) {
  validate(params);
  if (n_points < 2) throw DomainError("exact_sphere_curve requires n_points >= 2");
  double rho = sphere_radius(params);
  ProfileCurve curve;
  curve.params = params;
  curve.points.reserve(n_points);
  // Open semicircle strictly inside r > 0, traversed with the inward normal.
  for (std::size_t i = 0; i < n_points; ++i) {
    double a = kPi * (static_cast<double>(i) + 0.5) / n_points;
    double s = rho * a;
    curve.points.push_back({s, rho * std::cos(a), rho * std::sin(a),
                            kPi / 2 + a, 1.0 / rho});
  }
  return curve;
}

ProfileCurve exact_plane_curve(const Params& params, double r_lo, double r_hi,
                               std::size_t n_points) {
  validate(params);
  if (!(r_lo > 0.0) || !(r_hi > r_lo) || n_points < 2)
    throw DomainError("exact_plane_curve requires 0 < r_lo < r_hi");
  ProfileCurve curve;
  curve.params = params;
  curve.points.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    double r = r_lo + (r_hi - r_lo) * static_cast<double>(i) / (n_points - 1);
    curve.points.push_back({r - r_lo, -params.lambda, r, kPi / 2, 0.0});
  }
  return curve;
}

}  // namespace lambdasurf
