#include "rwave/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace rwave {

RadialGrid make_grid(double r_max, int n) {
  if (!(r_max > 0.0)) throw std::invalid_argument("make_grid: r_max must be positive");
  if (n < 16) throw std::invalid_argument("make_grid: need at least 16 cells");
  RadialGrid g;
  g.r_max = r_max;
  g.n = n;
  g.h = r_max / n;
  g.r = Eigen::ArrayXd::LinSpaced(n + 1, 0.0, r_max);
  return g;
}

Eigen::ArrayXd radial_derivative(const Eigen::ArrayXd& f, double h) {
  const Eigen::Index m = f.size();
  if (m < 3) throw std::invalid_argument("radial_derivative: need at least 3 samples");
  Eigen::ArrayXd df(m);
  df.segment(1, m - 2) = (f.segment(2, m - 2) - f.segment(0, m - 2)) / (2.0 * h);
  df[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  df[m - 1] = (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) / (2.0 * h);
  return df;
}

double trapezoid(const Eigen::ArrayXd& f, double h) {
  const Eigen::Index m = f.size();
  if (m < 2) return 0.0;
  return h * (f.sum() - 0.5 * (f[0] + f[m - 1]));
}

SampledIntegral::SampledIntegral(Eigen::ArrayXd values, double x0, double h)
    : f_(std::move(values)), x0_(x0), h_(h) {
  const Eigen::Index m = f_.size();
  cum_.resize(m);
  cum_[0] = 0.0;
  for (Eigen::Index j = 1; j < m; ++j)
    cum_[j] = cum_[j - 1] + 0.5 * h_ * (f_[j - 1] + f_[j]);
}

double SampledIntegral::up_to(double x) const {
  const Eigen::Index m = f_.size();
  const double span = (m - 1) * h_;
  double s = x - x0_;
  if (s <= 0.0) return 0.0;
  if (s >= span) return cum_[m - 1];
  const auto j = static_cast<Eigen::Index>(std::floor(s / h_));
  const double frac = s - j * h_;
  // exact integral of the linear interpolant over the partial cell
  const double slope = (f_[j + 1] - f_[j]) / h_;
  return cum_[j] + frac * f_[j] + 0.5 * slope * frac * frac;
}

double SampledIntegral::total() const { return cum_[f_.size() - 1]; }

ReducedState to_reduced(const FieldState& s, const RadialGrid& g, const ModelParams& mp) {
  const double q = (mp.d - 1) / 2.0;
  const Eigen::ArrayXd rq = g.r.pow(q);  // r^q, zero at the origin node
  ReducedState red;
  red.t = s.t;
  red.w = rq * s.u;
  const Eigen::ArrayXd wt = rq * s.ut;
  const Eigen::ArrayXd wr = radial_derivative(red.w, g.h);
  red.v_plus = wt - wr;
  red.v_minus = wt + wr;
  return red;
}

FieldState from_reduced(const ReducedState& s, const RadialGrid& g, const ModelParams& mp) {
  const double q = (mp.d - 1) / 2.0;
  const Eigen::Index m = g.size();
  FieldState out;
  out.t = s.t;
  out.u.resize(m);
  out.ut.resize(m);
  const Eigen::ArrayXd wt = 0.5 * (s.v_plus + s.v_minus);
  out.u.tail(m - 1) = s.w.tail(m - 1) / g.r.tail(m - 1).pow(q);
  out.ut.tail(m - 1) = wt.tail(m - 1) / g.r.tail(m - 1).pow(q);
  // quadratic extrapolation through nodes 1..3 fills the origin
  out.u[0] = 3.0 * out.u[1] - 3.0 * out.u[2] + out.u[3];
  out.ut[0] = 3.0 * out.ut[1] - 3.0 * out.ut[2] + out.ut[3];
  return out;
}

Eigen::ArrayXd energy_density(const FieldState& s, const RadialGrid& g, const ModelParams& mp) {
  const DerivedConstants k = derive(mp);
  const Eigen::ArrayXd ur = radial_derivative(s.u, g.h);
  Eigen::ArrayXd dens = 0.5 * (ur.square() + s.ut.square());
  if (mp.zeta != 0) dens += s.u.abs().pow(mp.p + 1.0) / (mp.p + 1.0);
  return k.c_d * g.r.pow(mp.d - 1) * dens;
}

double energy(const FieldState& s, const RadialGrid& g, const ModelParams& mp) {
  return trapezoid(energy_density(s, g, mp), g.h);
}

double local_energy(const FieldState& s, const RadialGrid& g, const ModelParams& mp,
                    double r_lo, double r_hi) {
  if (r_hi <= r_lo) return 0.0;
  SampledIntegral integral(energy_density(s, g, mp), 0.0, g.h);
  return integral.between(r_lo, r_hi);
}

double weighted_energy(const FieldState& s, const RadialGrid& g, const ModelParams& mp,
                       double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("weighted_energy: kappa must be >= 0");
  const Eigen::ArrayXd weight = 1.0 + g.r.pow(kappa);
  return trapezoid((weight * energy_density(s, g, mp)).eval(), g.h);
}

double h1_seminorm_sq(const Eigen::ArrayXd& u, const RadialGrid& g, const ModelParams& mp) {
  const Eigen::ArrayXd ur = radial_derivative(u, g.h);
  return sphere_area(mp.d) * trapezoid((ur.square() * g.r.pow(mp.d - 1)).eval(), g.h);
}

double l2_norm_sq(const Eigen::ArrayXd& f, const RadialGrid& g, const ModelParams& mp) {
  return sphere_area(mp.d) * trapezoid((f.square() * g.r.pow(mp.d - 1)).eval(), g.h);
}

double energy_norm_sq(const FieldState& s, const RadialGrid& g, const ModelParams& mp) {
  return h1_seminorm_sq(s.u, g, mp) + l2_norm_sq(s.ut, g, mp);
}

double lebesgue_norm_pow(const Eigen::ArrayXd& u, const RadialGrid& g, const ModelParams& mp,
                         double q) {
  return sphere_area(mp.d) * trapezoid((u.abs().pow(q) * g.r.pow(mp.d - 1)).eval(), g.h);
}

double potential_integral(const FieldState& s, const RadialGrid& g, const ModelParams& mp) {
  return lebesgue_norm_pow(s.u, g, mp, mp.p + 1.0);
}

Eigen::ArrayXd l_operator(const FieldState& s, const RadialGrid& g, const ModelParams& mp) {
  const double q = (mp.d - 1) / 2.0;
  const Eigen::Index m = g.size();
  const Eigen::ArrayXd rq = g.r.pow(q);
  const Eigen::ArrayXd dw = radial_derivative((rq * s.u).eval(), g.h);
  Eigen::ArrayXd lu(m);
  lu[0] = 0.0;
  lu.tail(m - 1) = dw.tail(m - 1) / rq.tail(m - 1);
  return lu;
}

double SplitNorm::relative_gap() const {
  return plain == 0.0 ? 0.0 : std::abs(split - plain) / plain;
}

SplitNorm h1_splitting(const FieldState& s, const RadialGrid& g, const ModelParams& mp) {
  const DerivedConstants k = derive(mp);
  const double q = (mp.d - 1) / 2.0;
  const Eigen::ArrayXd rq = g.r.pow(q);
  const Eigen::ArrayXd dw = radial_derivative((rq * s.u).eval(), g.h);
  // |Lu|^2 r^{d-1} = |dw|^2 exactly, so the singular factor never appears.
  Eigen::ArrayXd lhs = dw.square();
  if (k.lambda != 0.0) lhs += k.lambda * s.u.square() * g.r.pow(mp.d - 3);
  SplitNorm out;
  out.split = k.c_d * trapezoid(lhs, g.h);
  out.plain = h1_seminorm_sq(s.u, g, mp);
  return out;
}

}  // namespace rwave
