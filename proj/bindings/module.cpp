#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lambdasurf/classify.hpp"
#include "lambdasurf/formulations.hpp"
#include "lambdasurf/geometry.hpp"
#include "lambdasurf/ode.hpp"
#include "lambdasurf/search.hpp"

namespace py = pybind11;
namespace ls = lambdasurf;

namespace {

py::array_t<double> samples_array(const std::vector<ls::Sample>& samples) {
  py::array_t<double> out({samples.size(), std::size_t{5}});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    view(i, 0) = samples[i].s;
    view(i, 1) = samples[i].x;
    view(i, 2) = samples[i].r;
    view(i, 3) = samples[i].theta;
    view(i, 4) = samples[i].theta_dot;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_lambdasurf, m) {
  m.doc() =
      "Shooting-method toolkit for rotationally symmetric "
      "lambda-hypersurfaces: profile-curve integration with event "
      "detection, type classification, critical-parameter bisection, "
      "curvature verification and mesh export.";

  py::register_exception<ls::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ls::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ls::NoBracketError>(m, "NoBracketError",
                                             PyExc_RuntimeError);
  py::register_exception<ls::PrecisionLimitError>(m, "PrecisionLimitError",
                                                  PyExc_RuntimeError);
  py::register_exception<ls::DistinctRootsError>(m, "DistinctRootsError",
                                                 PyExc_RuntimeError);
  py::register_exception<ls::NotClosableError>(m, "NotClosableError",
                                               PyExc_RuntimeError);
  py::register_exception<ls::InsufficientDataError>(m, "InsufficientDataError",
                                                    PyExc_RuntimeError);
  py::register_exception<ls::UnsupportedDimensionError>(
      m, "UnsupportedDimensionError", PyExc_ValueError);

  py::class_<ls::Params>(m, "Params")
      .def(py::init<int, double>(), py::arg("n") = 2, py::arg("lambda_") = 0.0)
      .def_readwrite("n", &ls::Params::n)
      .def_readwrite("lambda_", &ls::Params::lambda)
      .def("__repr__", [](const ls::Params& p) {
        std::ostringstream os;
        os << "Params(n=" << p.n << ", lambda_=" << p.lambda << ")";
        return os.str();
      });

  m.def("cylinder_radius",
        py::overload_cast<const ls::Params&>(&ls::cylinder_radius),
        "Equilibrium cylinder radius R_lambda");
  m.def("flipped_cylinder_radius", &ls::flipped_cylinder_radius);
  m.def("sphere_radius", &ls::sphere_radius);

  py::enum_<ls::SampleMode>(m, "SampleMode")
      .value("dense", ls::SampleMode::dense)
      .value("steps", ls::SampleMode::steps);

  py::class_<ls::IntegratorControls>(m, "IntegratorControls")
      .def(py::init<>())
      .def_static("defaults_for", &ls::IntegratorControls::defaults_for)
      .def_readwrite("rel_tol", &ls::IntegratorControls::rel_tol)
      .def_readwrite("abs_tol", &ls::IntegratorControls::abs_tol)
      .def_readwrite("s_max", &ls::IntegratorControls::s_max)
      .def_readwrite("r_max", &ls::IntegratorControls::r_max)
      .def_readwrite("x_max", &ls::IntegratorControls::x_max)
      .def_readwrite("event_tol", &ls::IntegratorControls::event_tol)
      .def_readwrite("max_steps", &ls::IntegratorControls::max_steps)
      .def_readwrite("sample_spacing", &ls::IntegratorControls::sample_spacing)
      .def_readwrite("sample_mode", &ls::IntegratorControls::sample_mode);

  py::class_<ls::ProfileState>(m, "ProfileState")
      .def(py::init<double, double, double, double>(), py::arg("s") = 0.0,
           py::arg("x") = 0.0, py::arg("r") = 0.0, py::arg("theta") = 0.0)
      .def_readwrite("s", &ls::ProfileState::s)
      .def_readwrite("x", &ls::ProfileState::x)
      .def_readwrite("r", &ls::ProfileState::r)
      .def_readwrite("theta", &ls::ProfileState::theta);

  m.def(
      "rhs",
      [](const ls::ProfileState& st, const ls::Params& p) {
        auto d = ls::rhs(st, p);
        return py::make_tuple(d.dx, d.dr, d.dtheta);
      },
      py::arg("state"), py::arg("params"));
  m.def("theta_dot", &ls::theta_dot);
  m.def("initial_theta_dot", &ls::initial_theta_dot);

  py::class_<ls::EventRecord>(m, "EventRecord")
      .def_property_readonly(
          "kind", [](const ls::EventRecord& e) { return ls::to_string(e.kind); })
      .def_readonly("s", &ls::EventRecord::s)
      .def_readonly("state", &ls::EventRecord::state);

  py::class_<ls::Trajectory>(m, "Trajectory")
      .def_readonly("delta", &ls::Trajectory::delta)
      .def_readonly("params", &ls::Trajectory::params)
      .def_readonly("events", &ls::Trajectory::events)
      .def_property_readonly("termination",
                             [](const ls::Trajectory& t) {
                               return ls::to_string(t.termination);
                             })
      .def_property_readonly(
          "samples",
          [](const ls::Trajectory& t) { return samples_array(t.samples); },
          "(N, 5) array of columns s, x, r, theta, theta_dot")
      .def("state_at", &ls::Trajectory::state_at);

  m.def("integrate", &ls::integrate, py::arg("delta"), py::arg("params"),
        py::arg("controls"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<ls::EventSummary>(m, "EventSummary")
      .def_readonly("s1", &ls::EventSummary::s1)
      .def_readonly("s2", &ls::EventSummary::s2)
      .def_readonly("s3", &ls::EventSummary::s3)
      .def_readonly("s4", &ls::EventSummary::s4)
      .def_readonly("S", &ls::EventSummary::S)
      .def_readonly("b", &ls::EventSummary::b)
      .def_readonly("x_at_s1", &ls::EventSummary::x_at_s1)
      .def_readonly("theta_at_s1", &ls::EventSummary::theta_at_s1);

  m.def("summarize", &ls::summarize);

  py::class_<ls::TypeLabel>(m, "TypeLabel")
      .def_property_readonly(
          "label",
          [](const ls::TypeLabel& l) { return ls::to_string(l.label); })
      .def_readonly("margin", &ls::TypeLabel::margin);

  m.def(
      "classify_delta",
      [](double delta, const ls::Params& p, const ls::IntegratorControls& c) {
        return ls::classify_delta(delta, p, c);
      },
      py::arg("delta"), py::arg("params"), py::arg("controls"),
      py::call_guard<py::gil_scoped_release>());

  py::class_<ls::RadiusBoundCheck>(m, "RadiusBoundCheck")
      .def_readonly("bound_name", &ls::RadiusBoundCheck::bound_name)
      .def_readonly("bound", &ls::RadiusBoundCheck::bound)
      .def_readonly("b", &ls::RadiusBoundCheck::b)
      .def_readonly("satisfied", &ls::RadiusBoundCheck::satisfied);
  py::class_<ls::RadiusBoundReport>(m, "RadiusBoundReport")
      .def_readonly("applicable", &ls::RadiusBoundReport::applicable)
      .def_readonly("checks", &ls::RadiusBoundReport::checks);
  m.def("check_radius_bounds", &ls::check_radius_bounds);

  py::class_<ls::SweepRow>(m, "SweepRow")
      .def_readonly("delta", &ls::SweepRow::delta)
      .def_property_readonly(
          "label", [](const ls::SweepRow& r) { return ls::to_string(r.label); })
      .def_readonly("margin", &ls::SweepRow::margin)
      .def_readonly("summary", &ls::SweepRow::summary)
      .def_readonly("error", &ls::SweepRow::error);

  m.def("sweep", &ls::sweep, py::call_guard<py::gil_scoped_release>());
  m.def("seed_deltas", &ls::seed_deltas, py::arg("params"),
        py::arg("count") = 64);

  py::class_<ls::SearchResult>(m, "SearchResult")
      .def_property_readonly(
          "target",
          [](const ls::SearchResult& r) { return ls::to_string(r.target); })
      .def_readonly("delta_star", &ls::SearchResult::delta_star)
      .def_readonly("lo", &ls::SearchResult::lo)
      .def_readonly("hi", &ls::SearchResult::hi)
      .def_property_readonly(
          "lo_label",
          [](const ls::SearchResult& r) { return ls::to_string(r.lo_label); })
      .def_property_readonly(
          "hi_label",
          [](const ls::SearchResult& r) { return ls::to_string(r.hi_label); })
      .def_readonly("iterations", &ls::SearchResult::iterations)
      .def_readonly("closure_error", &ls::SearchResult::closure_error)
      .def_readonly("trajectory", &ls::SearchResult::trajectory);

  m.def("find_cylinder_delta", &ls::find_cylinder_delta,
        py::call_guard<py::gil_scoped_release>());
  m.def("find_torus_deltas", &ls::find_torus_deltas,
        py::call_guard<py::gil_scoped_release>());

  m.def("u_second", &ls::u_second);
  m.def("f_second", &ls::f_second);
  m.def("f_third", &ls::f_third);

  py::class_<ls::RescaledState>(m, "RescaledState")
      .def_readonly("t", &ls::RescaledState::t)
      .def_readonly("xi", &ls::RescaledState::xi)
      .def_readonly("rho", &ls::RescaledState::rho)
      .def_readonly("alpha", &ls::RescaledState::alpha);
  m.def("rescaled_rhs", [](double t, double xi, double rho, double alpha,
                           double delta, const ls::Params& p) {
    auto d = ls::rescaled_rhs({t, xi, rho, alpha}, delta, p);
    return py::make_tuple(d.dxi, d.drho, d.dalpha);
  });
  m.def("integrate_rescaled", &ls::integrate_rescaled, py::arg("delta"),
        py::arg("params"), py::arg("t_max"), py::arg("n_out"),
        py::arg("rel_tol") = 1e-12, py::arg("abs_tol") = 1e-13,
        py::call_guard<py::gil_scoped_release>());
  m.def("limit_profile_t_of_rho", &ls::limit_profile_t_of_rho);
  m.def("limit_profile_rho_of_t", &ls::limit_profile_rho_of_t);
  m.def("cross_validate", &ls::cross_validate,
        py::call_guard<py::gil_scoped_release>());

  py::class_<ls::ProfileCurve>(m, "ProfileCurve")
      .def_readonly("params", &ls::ProfileCurve::params)
      .def_readonly("closed", &ls::ProfileCurve::closed)
      .def_readonly("closure_error", &ls::ProfileCurve::closure_error)
      .def_readonly("source_delta", &ls::ProfileCurve::source_delta)
      .def_property_readonly(
          "points",
          [](const ls::ProfileCurve& c) { return samples_array(c.points); });

  m.def("curve_from_trajectory", &ls::curve_from_trajectory);
  m.def("reflect_close", &ls::reflect_close, py::arg("trajectory"),
        py::arg("closure_tol") = 1e-4);
  m.def("resample", &ls::resample);

  py::class_<ls::CurvatureSample>(m, "CurvatureSample")
      .def_readonly("s", &ls::CurvatureSample::s)
      .def_readonly("kappa_rot", &ls::CurvatureSample::kappa_rot)
      .def_readonly("kappa_prof", &ls::CurvatureSample::kappa_prof)
      .def_readonly("H", &ls::CurvatureSample::H)
      .def_readonly("residual", &ls::CurvatureSample::residual);
  m.def("curvature_profile", &ls::curvature_profile);

  py::class_<ls::ConvexityReport>(m, "ConvexityReport")
      .def_readonly("is_convex", &ls::ConvexityReport::is_convex)
      .def_readonly("rot_pattern", &ls::ConvexityReport::rot_pattern)
      .def_readonly("prof_pattern", &ls::ConvexityReport::prof_pattern);
  m.def("convexity_check", &ls::convexity_check);

  py::class_<ls::TriangleMesh>(m, "TriangleMesh")
      .def_property_readonly("vertices",
                             [](const ls::TriangleMesh& mesh) {
                               py::array_t<double> out(
                                   {mesh.vertices.size(), std::size_t{3}});
                               auto v = out.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < mesh.vertices.size();
                                    ++i)
                                 for (int j = 0; j < 3; ++j)
                                   v(i, j) = mesh.vertices[i][j];
                               return out;
                             })
      .def_property_readonly("faces",
                             [](const ls::TriangleMesh& mesh) {
                               py::array_t<int> out(
                                   {mesh.faces.size(), std::size_t{3}});
                               auto v = out.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < mesh.faces.size();
                                    ++i)
                                 for (int j = 0; j < 3; ++j)
                                   v(i, j) = mesh.faces[i][j];
                               return out;
                             });
  m.def("revolve_mesh", &ls::revolve_mesh);
  m.def("is_watertight", &ls::is_watertight);
  m.def("euler_characteristic", &ls::euler_characteristic);
  m.def("is_simple", &ls::is_simple);

  m.def("exact_cylinder_curve", &ls::exact_cylinder_curve);
  m.def("exact_sphere_curve", &ls::exact_sphere_curve);
  m.def("exact_plane_curve", &ls::exact_plane_curve);

  m.attr("__version__") = "0.1.0";
}
