#pragma once

// Shared test utilities, including the adaptive-quadrature oracle for the
// principal-value integral of the restricted fractional Laplacian. The oracle
// is independent of the matrix assembly it is used to check.

#include <cmath>
#include <functional>

#include "fpmlab/operators.hpp"

namespace testutil {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-11) {
  const double m = 0.5 * (a + b);
  return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 42);
}

/// Principal-value fractional derivative of a function vanishing outside
/// (a, b), evaluated at an interior point: symmetrized core, two one-sided
/// pieces, and the exact far tail where u vanishes. Independent of the matrix
/// assembly it is used to check.
inline double rfl_pv_oracle(const std::function<double(double)>& u, double x0, double s,
                            double a, double b) {
  const double ux = u(x0);
  const double r0 = 0.5 * std::min(x0 - a, b - x0);
  auto sym = [&](double t) {
    if (t == 0.0) return 0.0;
    return (2.0 * ux - u(x0 + t) - u(x0 - t)) / std::pow(t, 1.0 + 2.0 * s);
  };
  const double R = 2.0 * (b - a) + std::max(std::abs(a), std::abs(b));
  auto right = [&](double t) { return (ux - u(x0 + t)) / std::pow(t, 1.0 + 2.0 * s); };
  auto left = [&](double t) { return (ux - u(x0 - t)) / std::pow(t, 1.0 + 2.0 * s); };
  const double core = integrate(sym, 0.0, r0);
  const double one_sided = integrate(right, r0, R) + integrate(left, r0, R);
  const double tail = 2.0 * ux * std::pow(R, -2.0 * s) / (2.0 * s);
  return fpm::fractional_normalization(s) * (core + one_sided + tail);
}

/// The reference profile (1 - y^2)_+^s on (-1, 1).
inline double rfl_profile_oracle(double x0, double s) {
  return rfl_pv_oracle(
      [s](double y) { return std::abs(y) < 1.0 ? std::pow(1.0 - y * y, s) : 0.0; }, x0, s,
      -1.0, 1.0);
}

/// Closed-form value of the oracle at any interior point: the profile is an
/// exact eigen-like solution with constant image.
inline double rfl_profile_constant(double s) {
  return std::pow(2.0, 2.0 * s) * std::tgamma(1.0 + s) * std::tgamma(s + 0.5) /
         std::tgamma(0.5);
}

inline Eigen::VectorXd cosine_bump(const fpm::Grid& g, double center, double width,
                                   double amplitude) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(g.n);
  for (int i = 0; i < g.n; ++i) {
    const double r = (g.point(i) - center) / width;
    if (std::abs(r) < 1.0) {
      const double c = std::cos(0.5 * M_PI * r);
      u(i) = amplitude * c * c;
    }
  }
  return u;
}

}  // namespace testutil
