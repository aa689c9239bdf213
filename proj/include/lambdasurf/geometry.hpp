#ifndef LAMBDASURF_GEOMETRY_HPP
#define LAMBDASURF_GEOMETRY_HPP

#include <array>
#include <iosfwd>
#include <vector>

#include "lambdasurf/ode.hpp"

namespace lambdasurf {

struct NotClosableError : std::runtime_error {
  NotClosableError(const std::string& msg, double x_close_, double theta_err_)
      : std::runtime_error(msg), x_close(x_close_), theta_err(theta_err_) {}
  double x_close;
  double theta_err;
};

struct UnsupportedDimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProfileCurve {
  Params params;
  std::vector<Sample> points;
  bool closed = false;
  double closure_error = 0.0;  // 0 surrogate for open curves
  double source_delta = std::numeric_limits<double>::quiet_NaN();
};

ProfileCurve curve_from_trajectory(const Trajectory& traj);

/// Double a converged type-1.2 shot across the x = 0 axis into a closed
/// simple curve on [0, 2 s1]: the mirrored half is
/// (2 s1 - s, -x(s), r(s), 2 pi - theta(s)). Requires |x(s1)| and
/// |theta(s1) - pi| below closure_tol; throws NotClosableError otherwise.
ProfileCurve reflect_close(const Trajectory& traj, double closure_tol = 1e-4);

/// Arc-length resampling to at most max_points points (endpoints kept).
ProfileCurve resample(const ProfileCurve& curve, std::size_t max_points);

struct CurvatureSample {
  double s;
  double kappa_rot;   // -(cos theta)/r, multiplicity n-1
  double kappa_prof;  // theta' (unit-speed profile curvature)
  double H;           // kappa_prof + (n-1) * kappa_rot
  double residual;    // theta' - [((n-1)/r - r) cos theta + x sin theta + lambda]
};

/// Principal curvatures, mean curvature and the defining-equation residual
/// with the profile normal nu = (-r', x' alpha).
std::vector<CurvatureSample> curvature_profile(const ProfileCurve& curve,
                                               const Params& params);

/// Reverse the unit normal: negates both principal curvatures and H (the
/// reported lambda changes sign with it; the caller owns that bookkeeping).
void apply_normal_flip(std::vector<CurvatureSample>& samples);

struct ConvexityReport {
  bool is_convex = true;
  /// Condensed sign sequences of each principal curvature along the curve,
  /// e.g. "+", "-", "+0-".
  std::string rot_pattern;
  std::string prof_pattern;
};

/// Convex iff every principal curvature value over the whole curve shares a
/// weak sign.
ConvexityReport convexity_check(const std::vector<CurvatureSample>& samples);

struct TriangleMesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<double, 3>> normals;  // one per vertex
  std::vector<std::array<int, 3>> faces;       // 0-based vertex indices
};

/// Surface of revolution about the x-axis for n = 2:
/// vertex (x_i, r_i cos phi_j, r_i sin phi_j), phi_j = 2 pi j / segments.
/// Closed generating curves yield a watertight torus mesh.
TriangleMesh revolve_mesh(const ProfileCurve& curve, int segments);

/// Every undirected edge shared by exactly two faces with opposite
/// orientation.
bool is_watertight(const TriangleMesh& mesh);

int euler_characteristic(const TriangleMesh& mesh);

/// Segment-segment intersection scan at sample resolution. Adjacent segments
/// and pairs within exclusion_band of each other along the curve are skipped.
bool is_simple(const ProfileCurve& curve, double exclusion_band);

/// ASCII OBJ with v/vn/f records, 1-based indices, 9 significant digits.
void write_obj(std::ostream& os, const TriangleMesh& mesh);

/// Trajectory CSV columns plus kappa_rot,kappa_prof,H,residual.
void write_profile_csv(std::ostream& os, const ProfileCurve& curve,
                       const Params& params, bool flipped = false);

// Exact solution fixtures.

/// Constant cylinder r = R_lambda over x in [0, length].
ProfileCurve exact_cylinder_curve(const Params& params, double length,
                                  std::size_t n_points);

/// Round sphere of radius (-lambda + sqrt(lambda^2 + 4n))/2 traversed so the
/// profile normal points inward.
ProfileCurve exact_sphere_curve(const Params& params, std::size_t n_points);

/// Vertical profile line x = -lambda (the hyperplane solution) over
/// r in [r_lo, r_hi].
ProfileCurve exact_plane_curve(const Params& params, double r_lo, double r_hi,
                               std::size_t n_points);

}  // namespace lambdasurf

#endif
