#pragma once

#include <Eigen/Dense>

#include "rwave/params.hpp"

namespace rwave {

// Uniform radial grid on [0, r_max]: n cells, n+1 nodes, node j at j*h.
struct RadialGrid {
  double r_max = 1.0;
  int n = 16;
  double h = 1.0 / 16;
  Eigen::ArrayXd r;  // node coordinates, size n+1

  int size() const { return n + 1; }
};

// Throws std::invalid_argument unless r_max > 0 and n >= 16.
RadialGrid make_grid(double r_max, int n);

// Snapshot of (u, du/dt) sampled on the grid nodes at time t.
struct FieldState {
  double t = 0.0;
  Eigen::ArrayXd u, ut;
};

// Reduced snapshot: w = r^((d-1)/2) u together with the outgoing and incoming
// combinations v_plus = w_t - w_r and v_minus = w_t + w_r.  v_plus rides on
// lines t - r = const, v_minus on t + r = const.
struct ReducedState {
  double t = 0.0;
  Eigen::ArrayXd w, v_plus, v_minus;
};

// Second-order first derivative on uniform samples: centered in the interior,
// one-sided three-point stencils at both ends.  Needs at least 3 samples.
Eigen::ArrayXd radial_derivative(const Eigen::ArrayXd& f, double h);

// Composite trapezoid over the full sample range.
double trapezoid(const Eigen::ArrayXd& f, double h);

// Integral of the piecewise-linear interpolant of uniform samples, evaluable
// on sub-intervals.  between(a, b) is exactly additive over adjacent
// sub-intervals and reproduces the composite trapezoid rule on [x0, x_end].
class SampledIntegral {
 public:
  SampledIntegral(Eigen::ArrayXd values, double x0, double h);
  double up_to(double x) const;  // integral over [x0, clamp(x)]
  double between(double a, double b) const { return up_to(b) - up_to(a); }
  double total() const;

 private:
  Eigen::ArrayXd f_, cum_;
  double x0_, h_;
};

ReducedState to_reduced(const FieldState& s, const RadialGrid& g, const ModelParams& mp);

// Inverse of to_reduced away from the origin; u and u_t at r = 0 are filled by
// quadratic extrapolation through nodes 1..3.
FieldState from_reduced(const ReducedState& s, const RadialGrid& g, const ModelParams& mp);

// Nodal samples of c_d r^{d-1} (|u_r|^2/2 + |u_t|^2/2 + |u|^{p+1}/(p+1)), the
// potential term present only for zeta = -1.
Eigen::ArrayXd energy_density(const FieldState& s, const RadialGrid& g, const ModelParams& mp);

double energy(const FieldState& s, const RadialGrid& g, const ModelParams& mp);

// Energy restricted to the ball shell r_lo <= r <= r_hi (piecewise-linear
// density, exactly additive over adjoining shells).
double local_energy(const FieldState& s, const RadialGrid& g, const ModelParams& mp,
                    double r_lo, double r_hi);

// Energy with the weight (1 + r^kappa) against the same density; kappa = 0
// gives exactly twice the plain energy.
double weighted_energy(const FieldState& s, const RadialGrid& g, const ModelParams& mp,
                       double kappa);

// c_d * integral of u_r^2 r^{d-1} dr, i.e. |grad u|^2 over R^d for radial u.
double h1_seminorm_sq(const Eigen::ArrayXd& u, const RadialGrid& g, const ModelParams& mp);

// c_d * integral of f^2 r^{d-1} dr.
double l2_norm_sq(const Eigen::ArrayXd& f, const RadialGrid& g, const ModelParams& mp);

// |grad u|^2 + |u_t|^2 over R^d: the free energy norm squared of the pair.
double energy_norm_sq(const FieldState& s, const RadialGrid& g, const ModelParams& mp);

// c_d * integral of |u|^q r^{d-1} dr (the q-th power of the L^q norm).
double lebesgue_norm_pow(const Eigen::ArrayXd& u, const RadialGrid& g, const ModelParams& mp,
                         double q);

// c_d * integral of |u|^{p+1} r^{d-1} dr.
double potential_integral(const FieldState& s, const RadialGrid& g, const ModelParams& mp);

// First-order factor r^{-(d-1)/2} d/dr (r^{(d-1)/2} u); at interior nodes this
// is u_r + (d-1)/(2r) u to second order.  The node-0 entry is set to 0: the
// operator is singular there and every quadrature below weights it out.
Eigen::ArrayXd l_operator(const FieldState& s, const RadialGrid& g, const ModelParams& mp);

struct SplitNorm {
  double split;  // |Lu|^2 + lambda |u/r|^2 integrated over R^d
  double plain;  // |u_r|^2 integrated over R^d
  double relative_gap() const;
};

// The two sides of the first-order splitting of the radial H^1 seminorm.
// They agree analytically; the gap measures pure discretization error.
SplitNorm h1_splitting(const FieldState& s, const RadialGrid& g, const ModelParams& mp);

}  // namespace rwave
