// Internal Dormand-Prince 5(4) stepper for the 3-state systems used here.
// Not installed; ode.cpp and formulations.cpp share it.

#ifndef LAMBDASURF_SRC_RK45_HPP
#define LAMBDASURF_SRC_RK45_HPP

#include <array>
#include <cmath>

namespace lambdasurf::detail {

using Vec3 = std::array<double, 3>;

inline Vec3 axpy(double a, const Vec3& x, const Vec3& y) {
  return {a * x[0] + y[0], a * x[1] + y[1], a * x[2] + y[2]};
}

// Classic DP5(4) coefficients (FSAL).
struct Dopri5Tableau {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                          e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

// One embedded step. Rhs: Vec3(const Vec3&). Returns the scaled error norm;
// the caller accepts when err <= 1.
template <class Rhs>
struct Dopri5Step {
  Vec3 y1;       // 5th-order result
  Vec3 f1;       // rhs at y1 (FSAL)
  double err;    // scaled error norm
  bool finite;   // all stage evaluations finite
};

template <class Rhs>
Dopri5Step<Rhs> dopri5_step(const Rhs& rhs, const Vec3& y0, const Vec3& f0,
                            double h, double abs_tol, double rel_tol) {
  using T = Dopri5Tableau;
  Dopri5Step<Rhs> out{};
  out.finite = true;

  auto stage = [&](const Vec3& y) -> Vec3 {
    Vec3 f = rhs(y);
    if (!std::isfinite(f[0]) || !std::isfinite(f[1]) || !std::isfinite(f[2]))
      out.finite = false;
    return f;
  };

  Vec3 y, k2, k3, k4, k5, k6;
  for (int i = 0; i < 3; ++i) y[i] = y0[i] + h * T::a21 * f0[i];
  k2 = stage(y);
  for (int i = 0; i < 3; ++i)
    y[i] = y0[i] + h * (T::a31 * f0[i] + T::a32 * k2[i]);
  k3 = stage(y);
  for (int i = 0; i < 3; ++i)
    y[i] = y0[i] + h * (T::a41 * f0[i] + T::a42 * k2[i] + T::a43 * k3[i]);
  k4 = stage(y);
  for (int i = 0; i < 3; ++i)
    y[i] = y0[i] + h * (T::a51 * f0[i] + T::a52 * k2[i] + T::a53 * k3[i] +
                        T::a54 * k4[i]);
  k5 = stage(y);
  for (int i = 0; i < 3; ++i)
    y[i] = y0[i] + h * (T::a61 * f0[i] + T::a62 * k2[i] + T::a63 * k3[i] +
                        T::a64 * k4[i] + T::a65 * k5[i]);
  k6 = stage(y);
  for (int i = 0; i < 3; ++i)
    out.y1[i] = y0[i] + h * (T::b1 * f0[i] + T::b3 * k3[i] + T::b4 * k4[i] +
                             T::b5 * k5[i] + T::b6 * k6[i]);
  out.f1 = stage(out.y1);

  double err2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    double e = h * (T::e1 * f0[i] + T::e3 * k3[i] + T::e4 * k4[i] +
                    T::e5 * k5[i] + T::e6 * k6[i] + T::e7 * out.f1[i]);
    double sc =
        abs_tol + rel_tol * std::max(std::fabs(y0[i]), std::fabs(out.y1[i]));
    err2 += (e / sc) * (e / sc);
  }
  out.err = std::sqrt(err2 / 3.0);
  if (!out.finite) out.err = std::numeric_limits<double>::infinity();
  return out;
}

// Cubic Hermite interpolation over one accepted step.
struct HermiteSpan {
  double s0 = 0.0, h = 0.0;
  Vec3 y0{}, y1{}, f0{}, f1{};

  Vec3 eval(double s) const {
    double t = (s - s0) / h;
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1;
    double h10 = t3 - 2 * t2 + t;
    double h01 = -2 * t3 + 3 * t2;
    double h11 = t3 - t2;
    Vec3 y;
    for (int i = 0; i < 3; ++i)
      y[i] = h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i];
    return y;
  }

  // Largest deviation of the Hermite cubic from the chord, per component,
  // probed at the quarter points (the deviation vanishes at the endpoints).
  double chord_deviation(int i0, int i1) const {
    double dev = 0.0;
    for (double t : {0.25, 0.5, 0.75}) {
      Vec3 y = eval(s0 + t * h);
      for (int i : {i0, i1}) {
        double lin = y0[i] + t * (y1[i] - y0[i]);
        dev = std::max(dev, std::fabs(y[i] - lin));
      }
    }
    return dev;
  }
};

// PI step-size controller (order 5 error estimate).
struct PiController {
  double safety = 0.9;
  double err_prev = 1.0;
  static constexpr double alpha = 0.7 / 5.0;
  static constexpr double beta = 0.4 / 5.0;

  double next_factor(double err) {
    double e = std::max(err, 1e-30);
    double fac = safety * std::pow(e, -alpha) * std::pow(err_prev, beta);
    return std::clamp(fac, 0.2, 5.0);
  }

  double reject_factor(double err) const {
    return std::max(0.2, safety * std::pow(std::max(err, 1e-30), -0.2));
  }
};

}  // namespace lambdasurf::detail

#endif
