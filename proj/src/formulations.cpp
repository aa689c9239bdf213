#include "lambdasurf/formulations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rk45.hpp"

#include <json.hpp>

namespace lambdasurf {

namespace {

using detail::HermiteSpan;
using detail::PiController;
using detail::Vec3;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double u_second(double x, double u, double u1, const Params& params) {
  validate(params);
  if (!(u > 0.0) || !std::isfinite(u) || !std::isfinite(x) ||
      !std::isfinite(u1))
    throw DomainError("u_second requires finite inputs with u > 0");
  double q = 1.0 + u1 * u1;
  return q * (x * u1 - u + (params.n - 1) / u + params.lambda * std::sqrt(q));
}

double f_second(double r, double f, double f1, const Params& params) {
  validate(params);
  if (!(r > 0.0) || !std::isfinite(r) || !std::isfinite(f) ||
      !std::isfinite(f1))
    throw DomainError("f_second requires finite inputs with r > 0");
  double q = 1.0 + f1 * f1;
  return q * ((r - (params.n - 1) / r) * f1 - f - params.lambda * std::sqrt(q));
}

double f_third(double r, double f1, double f2, const Params& params) {
  validate(params);
  if (!(r > 0.0) || !std::isfinite(r) || !std::isfinite(f1) ||
      !std::isfinite(f2))
    throw DomainError("f_third requires finite inputs with r > 0");
  double q = 1.0 + f1 * f1;
  double nm1 = params.n - 1;
  return q * (2.0 * f1 * f2 * f2 / (q * q) + (r - nm1 / r) * f2 +
              nm1 / (r * r) * f1 - params.lambda * f1 * f2 / std::sqrt(q));
}

RescaledDerivatives rescaled_rhs(const RescaledState& state, double delta,
                                 const Params& params) {
  validate(params);
  if (!(1.0 + state.rho > 0.0))
    throw DomainError("rescaled_rhs requires 1 + rho > 0");
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw DomainError("rescaled_rhs requires delta >= 0");
  double ca = std::cos(state.alpha);
  double sa = std::sin(state.alpha);
  double dalpha = (params.n - 1) / (1.0 + state.rho) * ca +
                  params.lambda * delta +
                  delta * delta * (state.xi * sa - (1.0 + state.rho) * ca);
  return {ca, sa, dalpha};
}

std::vector<RescaledState> integrate_rescaled(double delta,
                                              const Params& params,
                                              double t_max, std::size_t n_out,
                                              double rel_tol, double abs_tol) {
  validate(params);
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw DomainError("integrate_rescaled requires delta >= 0");
  if (!(t_max > 0.0) || n_out == 0)
    throw DomainError("integrate_rescaled requires t_max > 0 and n_out > 0");

  auto frhs = [&](const Vec3& y) -> Vec3 {
    double rho = y[1];
    if (!(1.0 + rho > 1e-12)) return {kNan, kNan, kNan};
    double ca = std::cos(y[2]);
    double sa = std::sin(y[2]);
    return {ca, sa,
            (params.n - 1) / (1.0 + rho) * ca + params.lambda * delta +
                delta * delta * (y[0] * sa - (1.0 + rho) * ca)};
  };

  std::vector<RescaledState> out;
  out.reserve(n_out + 1);
  out.push_back({0.0, 0.0, 0.0, 0.0});

  Vec3 y = {0.0, 0.0, 0.0};
  Vec3 f = frhs(y);
  double t = 0.0;
  double h = std::min(1e-4, t_max);
  PiController pi;
  std::size_t next = 1;

  for (std::int64_t steps = 0; steps < 10'000'000 && next <= n_out; ++steps) {
    h = std::min(h, t_max - t);
    if (h < 1e-14) break;
    auto step = detail::dopri5_step(frhs, y, f, h, abs_tol, rel_tol);
    if (!(step.err <= 1.0)) {
      h *= pi.reject_factor(step.err);
      continue;
    }
    HermiteSpan span{t, h, y, step.y1, f, step.f1};
    while (next <= n_out) {
      double tk = t_max * static_cast<double>(next) / n_out;
      if (tk > t + h + 1e-14) break;
      Vec3 yk = (std::fabs(tk - (t + h)) < 1e-14) ? step.y1 : span.eval(tk);
      out.push_back({tk, yk[0], yk[1], yk[2]});
      ++next;
    }
    t += h;
    y = step.y1;
    f = step.f1;
    h *= pi.next_factor(step.err);
    pi.err_prev = std::max(step.err, 1e-30);
  }
  return out;
}

double limit_profile_t_of_rho(double rho, const Params& params) {
  validate(params);
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw DomainError("limit_profile_t_of_rho requires rho > 0");
  const double m = params.n - 1;
  // After p = w^2 the integrand is bounded at the lower endpoint; expm1/log1p
  // keep (1+w^2)^(2m) - 1 accurate for small w.
  auto g = [m](double w) {
    double w2 = w * w;
    double denom = std::sqrt(std::expm1(2.0 * m * std::log1p(w2)));
    return 2.0 * w * std::pow(1.0 + w2, m) / denom;
  };
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      g, 0.0, std::sqrt(rho), 12, 1e-13);
}

double limit_profile_rho_of_t(double t, const Params& params) {
  validate(params);
  if (!std::isfinite(t) || t < 0.0)
    throw DomainError("limit_profile_rho_of_t requires t >= 0");
  if (t == 0.0) return 0.0;

  const double m = params.n - 1;
  auto dt_drho = [m](double rho) {
    return std::pow(1.0 + rho, m) /
           std::sqrt(std::expm1(2.0 * m * std::log1p(rho)));
  };

  double lo = 0.0, hi = std::max(2.0 * t, 1.0);
  while (limit_profile_t_of_rho(hi, params) < t) hi *= 2.0;

  // Safeguarded Newton on t(rho) - t.
  double rho = std::min(hi, std::max(1e-8, t));
  for (int it = 0; it < 200; ++it) {
    double ft = limit_profile_t_of_rho(rho, params) - t;
    if (ft > 0.0)
      hi = rho;
    else
      lo = rho;
    double step = ft / dt_drho(rho);
    double next = rho - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - rho) < 1e-15 * std::max(1.0, rho)) return next;
    rho = next;
  }
  return rho;
}

namespace {

struct FdDerivatives {
  double d1;
  double d2;
};

// Centered three-point stencil on a non-uniform grid.
FdDerivatives fd_at(double x0, double x1, double x2, double y0, double y1,
                    double y2) {
  double h1 = x1 - x0;
  double h2 = x2 - x1;
  double d1 = (-h2 / (h1 * (h1 + h2))) * y0 +
              ((h2 - h1) / (h1 * h2)) * y1 + (h1 / (h2 * (h1 + h2))) * y2;
  double d2 = 2.0 * (y0 / (h1 * (h1 + h2)) - y1 / (h1 * h2) +
                     y2 / (h2 * (h1 + h2)));
  return {d1, d2};
}

// First maximal run of sample indices satisfying pred.
template <class Pred>
std::pair<std::size_t, std::size_t> first_run(const std::vector<Sample>& v,
                                              Pred pred) {
  std::size_t best_lo = 0, best_hi = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    if (!pred(v[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < v.size() && pred(v[j])) ++j;
    if (j - i > best_hi - best_lo) {
      best_lo = i;
      best_hi = j;
    }
    i = j;
  }
  return {best_lo, best_hi};
}

}  // namespace

double cross_validate(const Trajectory& traj, double /*tol*/) {
  validate(traj.params);
  const auto& v = traj.samples;
  constexpr std::size_t kMinRun = 5;
  // Window constants keep the graph slopes at most ~tan(0.9) and the graph
  // curvatures bounded: the finite-difference truncation grows like the
  // seventh power of the secant at the window edge and with the local
  // curvature scale, so steep or tightly-curved sub-arcs are left out.
  // The slope windows overlap on (0.7, 0.9).
  const double u_cos_floor = std::cos(0.9);
  const double f_sin_floor = std::sin(0.7);
  const double curv_cap = 5.0;

  double worst = -1.0;

  // Graph r = u(x): needs x strictly monotone, i.e. cos(theta) away from 0.
  {
    auto [lo, hi] = first_run(v, [&](const Sample& p) {
      double ct = std::cos(p.theta);
      return ct > u_cos_floor &&
             std::fabs(p.theta_dot) < curv_cap * ct * ct * ct;
    });
    if (hi - lo >= kMinRun) {
      for (std::size_t i = lo + 1; i + 1 < hi; ++i) {
        auto fd = fd_at(v[i - 1].x, v[i].x, v[i + 1].x, v[i - 1].r, v[i].r,
                        v[i + 1].r);
        double defect =
            std::fabs(fd.d2 - u_second(v[i].x, v[i].r, fd.d1, traj.params));
        worst = std::max(worst, defect);
      }
    }
  }

  // Graph x = f(r): needs r strictly monotone, i.e. sin(theta) away from 0.
  {
    auto [lo, hi] = first_run(v, [&](const Sample& p) {
      double st = std::sin(p.theta);
      return st > f_sin_floor &&
             std::fabs(p.theta_dot) < curv_cap * st * st * st;
    });
    if (hi - lo >= kMinRun) {
      for (std::size_t i = lo + 1; i + 1 < hi; ++i) {
        auto fd = fd_at(v[i - 1].r, v[i].r, v[i + 1].r, v[i - 1].x, v[i].x,
                        v[i + 1].x);
        double defect =
            std::fabs(fd.d2 - f_second(v[i].r, v[i].x, fd.d1, traj.params));
        worst = std::max(worst, defect);
      }
    }
  }

  if (worst < 0.0)
    throw InsufficientDataError(
        "cross_validate: no sub-arc long enough for finite differences");
  return worst;
}

std::vector<GraphSampleF> f_graph_from_trajectory(const Trajectory& traj,
                                                  double sin_guard) {
  validate(traj.params);
  std::vector<GraphSampleF> out;
  out.reserve(traj.samples.size());
  for (const Sample& p : traj.samples) {
    double st = std::sin(p.theta);
    if (!(st > sin_guard)) continue;
    double f1 = std::cos(p.theta) / st;
    double f2 = -p.theta_dot / (st * st * st);
    out.push_back({p.r, p.x, f1, f2, f_third(p.r, f1, f2, traj.params)});
  }
  return out;
}

std::vector<GraphSampleU> u_graph_from_trajectory(const Trajectory& traj,
                                                  double cos_guard) {
  validate(traj.params);
  std::vector<GraphSampleU> out;
  out.reserve(traj.samples.size());
  for (const Sample& p : traj.samples) {
    double ct = std::cos(p.theta);
    if (!(ct > cos_guard)) continue;
    double u1 = std::sin(p.theta) / ct;
    out.push_back({p.x, p.r, u1, u_second(p.x, p.r, u1, traj.params)});
  }
  return out;
}

std::vector<LemmaViolation> check_inflection_slope(
    std::span<const GraphSampleF> arc, double f2_tol) {
  std::vector<LemmaViolation> out;
  for (const auto& p : arc) {
    if (std::fabs(p.f2) < f2_tol && std::fabs(p.f1) > 10.0 * f2_tol &&
        !(p.f1 * p.f3 > 0.0))
      out.push_back({p.r, p.f1 * p.f3, "f1*f3 <= 0 at an inflection"});
  }
  return out;
}

std::vector<LemmaViolation> check_sign_propagation(
    std::span<const GraphSampleF> arc, double guard) {
  std::vector<LemmaViolation> out;
  bool seen_positive = false;
  for (const auto& p : arc) {
    double v = p.f1 * p.f2;
    if (v > guard) seen_positive = true;
    if (seen_positive && v < -guard)
      out.push_back({p.r, v, "f1*f2 fell back below zero at larger r"});
  }
  return out;
}

std::vector<LemmaViolation> check_single_inflection(
    std::span<const GraphSampleF> arc, double guard) {
  std::vector<LemmaViolation> out;
  int sign = 0;
  int flips = 0;
  for (const auto& p : arc) {
    if (std::fabs(p.f2) <= guard) continue;
    int s = p.f2 > 0.0 ? 1 : -1;
    if (sign != 0 && s != sign) {
      ++flips;
      if (flips > 1)
        out.push_back({p.r, p.f2, "second sign change of f'' on one arc"});
    }
    sign = s;
  }
  return out;
}

std::string validation_report_json(std::span<const ValidationRecord> records) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& rec : records) {
    nlohmann::ordered_json row;
    row["check"] = rec.check;
    row["arc"] = {rec.arc_lo, rec.arc_hi};
    row["max_defect"] = rec.max_defect;
    row["pass"] = rec.pass;
    out.push_back(row);
  }
  return out.dump(2);
}

}  // namespace lambdasurf
