#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lambdasurf/formulations.hpp"
#include "test_support.hpp"

using namespace lambdasurf;
using lstest::fast_controls;

namespace {

// Independent quadrature oracle: composite Simpson on the w-substituted
// integrand, at two refinement levels.
double limit_t_simpson(double rho, int n, std::size_t panels) {
  double m = n - 1;
  auto g = [m](double w) {
    if (w == 0.0) return std::sqrt(2.0 / m);
    double w2 = w * w;
    return 2.0 * w * std::pow(1.0 + w2, m) /
           std::sqrt(std::expm1(2.0 * m * std::log1p(w2)));
  };
  double b = std::sqrt(rho);
  double h = b / (2.0 * panels);
  double acc = g(0.0) + g(b);
  for (std::size_t i = 1; i < 2 * panels; ++i)
    acc += g(i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("u_second examples") {
  Params p4{2, 0.4};
  CHECK(u_second(3.7, cylinder_radius(p4), 0.0, p4) ==
        doctest::Approx(0.0).epsilon(1e-14));
  Params p{2, 0.0};
  CHECK(u_second(0.0, 1.0, 0.0, p) == 0.0);
  CHECK(u_second(0.0, 2.0, 0.0, p) == doctest::Approx(-1.5).epsilon(1e-15));
  CHECK_THROWS_AS(u_second(0.0, -1.0, 0.0, p), DomainError);
}

TEST_CASE("f_second examples") {
  Params p24{2, -0.24};
  for (double r : {0.3, 1.0, 4.5})
    CHECK(f_second(r, 0.24, 0.0, p24) == doctest::Approx(0.0).epsilon(1e-15));
  Params p{2, 0.0};
  CHECK(f_second(1.0, 0.0, 1.0, p) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(f_second(2.0, 0.0, 1.0, p) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(f_second(0.0, 0.0, 0.0, p), DomainError);
}

TEST_CASE("f_third examples") {
  Params p{2, 0.0};
  CHECK(f_third(1.7, 0.0, 0.0, p) == 0.0);
  CHECK(f_third(1.0, 1.0, 0.0, p) == doctest::Approx(2.0).epsilon(1e-15));
  Params p24{2, -0.24};
  CHECK(f_third(1.0, -1.0, 0.0, p24) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(-1.0 * f_third(1.0, -1.0, 0.0, p24) > 0.0);  // f1*f3 > 0 either slope
}

TEST_CASE("rescaled_rhs examples") {
  Params p{2, 0.0};
  auto d = rescaled_rhs({0.0, 0.0, 0.0, 0.0}, 0.0, p);
  CHECK(d.dxi == 1.0);
  CHECK(d.drho == 0.0);
  CHECK(d.dalpha == doctest::Approx(1.0).epsilon(1e-15));

  auto d2 = rescaled_rhs({0.0, 3.0, 0.5, std::numbers::pi / 2}, 0.0,
                         Params{5, 0.7});
  CHECK(d2.dxi == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d2.drho == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d2.dalpha == doctest::Approx(0.0).epsilon(1e-15));

  auto d3 = rescaled_rhs({0.0, 0.0, 0.0, 0.0}, 0.1, Params{2, -0.24});
  CHECK(d3.dalpha == doctest::Approx(0.966).epsilon(1e-14));

  CHECK_THROWS_AS(rescaled_rhs({0.0, 0.0, -1.0, 0.0}, 0.0, p), DomainError);
  CHECK_THROWS_AS(rescaled_rhs({0.0, 0.0, 0.0, 0.0}, -0.1, p), DomainError);
}

TEST_CASE("limit profile arc parameter") {
  Params p{2, 0.0};
  SUBCASE("empty integral at rho -> 0+") {
    CHECK(limit_profile_t_of_rho(1e-12, p) < 2e-6);
    CHECK_THROWS_AS(limit_profile_t_of_rho(0.0, p), DomainError);
    CHECK_THROWS_AS(limit_profile_t_of_rho(-1.0, p), DomainError);
  }
  SUBCASE("closed form for n = 2: t = sqrt(rho^2 + 2 rho)") {
    for (double rho : {0.1, 0.5, 1.0, 3.0})
      CHECK(limit_profile_t_of_rho(rho, p) ==
            doctest::Approx(std::sqrt(rho * rho + 2.0 * rho)).epsilon(1e-12));
  }
  SUBCASE("n = 3 against the Simpson oracle at two refinement levels") {
    Params p3{3, 0.0};
    double coarse = limit_t_simpson(1.0, 3, 1 << 10);
    double fine = limit_t_simpson(1.0, 3, 1 << 12);
    REQUIRE(std::fabs(coarse - fine) < 1e-10);
    CHECK(limit_profile_t_of_rho(1.0, p3) ==
          doctest::Approx(fine).epsilon(1e-10));
    CHECK(limit_profile_t_of_rho(1.0, p3) ==
          doctest::Approx(1.3796635686420302).epsilon(1e-12));
  }
  SUBCASE("strictly increasing") {
    double prev = 0.0;
    for (double rho = 0.25; rho < 4.0; rho += 0.25) {
      double t = limit_profile_t_of_rho(rho, p);
      CHECK(t > prev);
      prev = t;
    }
  }
}

TEST_CASE("limit profile inversion") {
  Params p{2, 0.0};
  CHECK(limit_profile_rho_of_t(0.0, p) == 0.0);
  for (double t : {0.3, 1.0, std::sqrt(3.0), 2.0}) {
    double rho = limit_profile_rho_of_t(t, p);
    CHECK(rho == doctest::Approx(std::sqrt(1.0 + t * t) - 1.0).epsilon(1e-10));
  }
  Params p3{3, 0.0};
  for (double t : {0.4, 1.1, 2.0})
    CHECK(limit_profile_t_of_rho(limit_profile_rho_of_t(t, p3), p3) ==
          doctest::Approx(t).epsilon(1e-10));
}

TEST_CASE("rescaled system converges linearly to the delta = 0 limit") {
  Params p{2, -0.24};
  double sup[3];
  double deltas[3] = {0.1, 0.05, 0.025};
  for (int k = 0; k < 3; ++k) {
    auto states = integrate_rescaled(deltas[k], p, 2.0, 1000);
    double worst = 0.0;
    for (const auto& st : states) {
      double rho0 = std::sqrt(1.0 + st.t * st.t) - 1.0;
      worst = std::max(worst, std::fabs(st.rho - rho0));
    }
    sup[k] = worst;
  }
  CHECK(sup[0] / sup[1] > 1.7);
  CHECK(sup[0] / sup[1] < 2.3);
  CHECK(sup[1] / sup[2] > 1.7);
  CHECK(sup[1] / sup[2] < 2.3);

  // the delta = 0 run reproduces the closed form directly
  auto limit = integrate_rescaled(0.0, p, 2.0, 500);
  for (const auto& st : limit)
    CHECK(std::fabs(st.rho - (std::sqrt(1.0 + st.t * st.t) - 1.0)) < 1e-9);
}

TEST_CASE("cross_validate on the cylinder") {
  Params p{2, 0.0};
  auto c = IntegratorControls::defaults_for(p);
  // moderate uniform spacing: at micro-spacings the second-difference
  // weights alone cost ~eps/h^2 even on bitwise-constant data
  c.sample_spacing = 5e-3;
  c.s_max = 10.0;
  Trajectory t = integrate(1.0, p, c);
  CHECK(cross_validate(t, 1e-10) < 1e-10);
}

TEST_CASE("cross_validate second-order decay") {
  Params p{2, 0.0};
  auto c = IntegratorControls::defaults_for(p);
  c.sample_spacing = 1e-3;
  Trajectory coarse = integrate(0.5, p, c);
  c.sample_spacing = 5e-4;
  Trajectory fine = integrate(0.5, p, c);
  double dc = cross_validate(coarse, 1e-5);
  double df = cross_validate(fine, 1e-5);
  CHECK(df < 2e-5);
  CHECK(dc / df > 2.5);
  CHECK(dc / df < 6.5);
}

TEST_CASE("cross_validate insufficient data") {
  Trajectory tiny;
  tiny.params = {2, 0.0};
  tiny.delta = 0.5;
  tiny.samples = {{0.0, 0.0, 0.5, 0.0, 1.5},
                  {0.1, 0.0997, 0.5075, 0.149, 1.47},
                  {0.2, 0.197, 0.529, 0.295, 1.39}};
  CHECK_THROWS_AS(cross_validate(tiny, 1e-5), InsufficientDataError);
}

TEST_CASE("f-graph lemma checks along integrated shots") {
  // type-2 shot: one inflection (at s2), f1*f2 sign switch there
  Params p{2, -0.4};
  Trajectory t2 = integrate(0.05, p, IntegratorControls::defaults_for(p));
  auto arc = f_graph_from_trajectory(t2);
  REQUIRE(arc.size() > 100);
  double f2_scale = 0.0;
  for (const auto& q : arc) f2_scale = std::max(f2_scale, std::fabs(q.f2));
  double guard = 1e-7 * f2_scale;

  CHECK(check_sign_propagation(arc, guard).empty());
  CHECK(check_single_inflection(arc, guard).empty());
  CHECK(check_inflection_slope(arc, 1e-6).empty());

  // type-1 shot: f1 changes sign at s3, f2 stays negative
  Params p0{2, 0.0};
  Trajectory t1 = integrate(0.5, p0, IntegratorControls::defaults_for(p0));
  auto arc1 = f_graph_from_trajectory(t1);
  REQUIRE(arc1.size() > 100);
  CHECK(check_sign_propagation(arc1, guard).empty());
  CHECK(check_single_inflection(arc1, guard).empty());
  for (const auto& q : arc1) CHECK(q.f2 < 0.0);
}

TEST_CASE("u-graph samples satisfy their own equation") {
  Params p{2, 0.0};
  Trajectory t = integrate(0.5, p, IntegratorControls::defaults_for(p));
  auto arc = u_graph_from_trajectory(t);
  REQUIRE(arc.size() > 100);
  // on the solution curve u'' = theta' * sec^3(theta)
  for (std::size_t i = 0; i < arc.size(); i += 53) {
    const auto& q = arc[i];
    double theta = std::atan(q.u1);
    double sec = std::sqrt(1.0 + q.u1 * q.u1);
    double theta_dot = rhs({0.0, q.x, q.u, theta}, p).dtheta;
    CHECK(q.u2 == doctest::Approx(theta_dot * sec * sec * sec).epsilon(1e-9));
  }
}

TEST_CASE("sign propagation flags a genuine violation") {
  std::vector<GraphSampleF> fake = {
      {1.0, 0.0, 1.0, 1.0, 0.0},   // f1*f2 > 0
      {1.1, 0.0, 1.0, -1.0, 0.0},  // back below: violates the lemma shape
  };
  CHECK(check_sign_propagation(fake, 1e-9).size() == 1);
  std::vector<GraphSampleF> fake2 = {
      {1.0, 0.0, 1.0, 1.0, 0.0},
      {1.1, 0.0, 1.0, -1.0, 0.0},
      {1.2, 0.0, 1.0, 1.0, 0.0},
  };
  CHECK(check_single_inflection(fake2, 1e-9).size() == 1);
}

TEST_CASE("validation report serialization") {
  std::vector<ValidationRecord> recs = {
      {"formulation-equivalence", 0.1, 1.2, 3.4e-7, true}};
  std::string json = validation_report_json(recs);
  CHECK(json.find("\"check\"") != std::string::npos);
  CHECK(json.find("\"max_defect\"") != std::string::npos);
  CHECK(json.find("true") != std::string::npos);
}
