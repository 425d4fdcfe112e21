#pragma once

// shared oracles and helpers for the test suites; everything here is
// independent of the library's own quadrature/stepping so it can act as a
// cross-check rather than a mirror.

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "rwave/grid.hpp"
#include "rwave/params.hpp"

namespace testsupport {

// Adaptive Simpson quadrature, independent of the library's trapezoid rule.
inline double simpson_slice(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double m,
                               double b, double fa, double fm, double fb, double whole,
                               double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson_slice(f, a, m, fa, flm, fm);
  double right = simpson_slice(f, m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  if (!(b > a)) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  return adaptive_simpson(f, a, m, b, fa, fm, fb, simpson_slice(f, a, b, fa, fm, fb), tol, 48);
}

// d = 3 closed-form solution for radial data (u0, u1) = (phi, psi):
// w = r u satisfies the 1D wave equation with odd extension, so
// u(r, t) = [ (r+t) phi(r+t) + (r-t) phi(r-t) ]/(2r) + (1/2r) int_{r-t}^{r+t} s psi(s) ds
// with phi, psi extended evenly from [0, inf).
struct DAlembert3 {
  std::function<double(double)> phi, psi;  // defined for argument >= 0

  double phi_ext(double x) const { return phi(std::abs(x)); }
  double psi_int(double a, double b) const {  // int_a^b s psi(|s|) ds
    return integrate([&](double s) { return s * psi(std::abs(s)); }, a, b, 1e-13);
  }

  double u(double r, double t) const {
    if (r < 1e-12) {
      // limit via l'Hopital: u(0,t) = phi(t) + t phi'(t) + t psi(t); avoid the
      // derivative by evaluating at tiny r instead
      r = 1e-7;
    }
    double travel = (r + t) * phi_ext(r + t) + (r - t) * phi_ext(r - t);
    return (0.5 * travel + 0.5 * psi_int(r - t, r + t)) / r;
  }

  double ut(double r, double t, double dt = 1e-6) const {
    return (u(r, t + dt) - u(r, t - dt)) / (2.0 * dt);
  }
};

// least-squares slope of log(err) against log(h): the observed order
inline double convergence_order(const std::vector<double>& hs, const std::vector<double>& errs) {
  if (hs.size() != errs.size() || hs.size() < 2)
    throw std::invalid_argument("convergence_order: need matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = static_cast<double>(hs.size());
  for (size_t i = 0; i < hs.size(); ++i) {
    double x = std::log(hs[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline rwave::FieldState gaussian_state(const rwave::RadialGrid& g, double amp, double width) {
  rwave::FieldState s;
  s.t = 0.0;
  s.u = amp * (-(g.r / width).square()).exp();
  s.ut = Eigen::ArrayXd::Zero(g.size());
  return s;
}

inline rwave::FieldState bump_state(const rwave::RadialGrid& g, double amp, double r_in,
                                    double r_out) {
  rwave::FieldState s;
  s.t = 0.0;
  s.u = Eigen::ArrayXd::Zero(g.size());
  s.ut = Eigen::ArrayXd::Zero(g.size());
  double mid = 0.5 * (r_in + r_out), half = 0.5 * (r_out - r_in);
  for (int j = 0; j < g.size(); ++j) {
    double x = (g.r[j] - mid) / half;
    if (std::abs(x) < 1.0) {
      double b = 1.0 - x * x;
      s.u[j] = amp * b * b * b * b;
    }
  }
  return s;
}

}  // namespace testsupport
