#include "rwave/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rwave {
namespace {

struct PointSample {
  double u, ut, ur;
};

// Linear interpolation of u, ut and of the second-order nodal derivative.
PointSample sample_point(const FieldState& s, const RadialGrid& g, double r) {
  const int n = g.n;
  double x = std::clamp(r / g.h, 0.0, static_cast<double>(n));
  int j = std::min(static_cast<int>(x), n - 1);
  double frac = x - j;

  auto node_deriv = [&](int k) {
    if (k == 0) return (-3.0 * s.u[0] + 4.0 * s.u[1] - s.u[2]) / (2.0 * g.h);
    if (k == n) return (3.0 * s.u[n] - 4.0 * s.u[n - 1] + s.u[n - 2]) / (2.0 * g.h);
    return (s.u[k + 1] - s.u[k - 1]) / (2.0 * g.h);
  };

  PointSample out;
  out.u = (1.0 - frac) * s.u[j] + frac * s.u[j + 1];
  out.ut = (1.0 - frac) * s.ut[j] + frac * s.ut[j + 1];
  out.ur = (1.0 - frac) * node_deriv(j) + frac * node_deriv(j + 1);
  return out;
}

// Outward flux density through the cone r = t - eta, parametrized by t.  The
// sqrt(2) surface measure of the cone cancels against the 1/sqrt(2) of the
// balance identity, leaving c_d r^{d-1} times the characteristic combination.
double flux_integrand(const FieldState& s, const RadialGrid& g, const ModelParams& mp,
                      const DerivedConstants& k, double r) {
  if (r <= 0.0) return 0.0;
  PointSample ps = sample_point(s, g, r);
  double val = 0.5 * ps.ur * ps.ur + 0.5 * ps.ut * ps.ut + ps.ur * ps.ut;
  if (mp.zeta != 0)
    val -= (mp.zeta / (mp.p + 1.0)) * std::pow(std::abs(ps.u), mp.p + 1.0);
  return k.c_d * std::pow(r, mp.d - 1) * val;
}

double time_trapezoid(const Series& s) {
  double acc = 0.0;
  for (size_t k = 0; k + 1 < s.size(); ++k)
    acc += 0.5 * (s[k].second + s[k + 1].second) * (s[k + 1].first - s[k].first);
  return acc;
}

double snapshot_tol(const Trajectory& traj) {
  double gap = 0.0;
  for (size_t k = 0; k + 1 < traj.states.size(); ++k)
    gap = std::max(gap, traj.states[k + 1].t - traj.states[k].t);
  return 0.5 * gap + 1e-12;
}

size_t state_index(const Trajectory& traj, double t, double tol) {
  size_t best = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < traj.states.size(); ++k) {
    double d = std::abs(traj.states[k].t - t);
    if (d < dist) {
      dist = d;
      best = k;
    }
  }
  if (dist > tol) throw std::out_of_range("no snapshot near requested time");
  return best;
}

}  // namespace

double integrate_series(const Series& series, double a, double b) {
  if (a >= b || series.size() < 2) return 0.0;
  double acc = 0.0;
  for (size_t k = 0; k + 1 < series.size(); ++k) {
    double t0 = series[k].first, t1 = series[k + 1].first;
    double lo = std::max(a, t0), hi = std::min(b, t1);
    if (lo >= hi || t1 <= t0) continue;
    auto at = [&](double t) {
      double s = (t - t0) / (t1 - t0);
      return (1.0 - s) * series[k].second + s * series[k + 1].second;
    };
    acc += 0.5 * (at(lo) + at(hi)) * (hi - lo);
  }
  return acc;
}

FluxBalance flux_balance(const Trajectory& traj, double eta, double t1, double t2) {
  if (!(t1 < t2)) throw std::invalid_argument("flux_balance: need t1 < t2");
  if (traj.states.size() < 2) throw std::invalid_argument("flux_balance: too few snapshots");
  const RadialGrid& g = traj.grid;
  const ModelParams& mp = traj.params;
  DerivedConstants k = derive(mp);

  double tol = snapshot_tol(traj);
  size_t a = state_index(traj, t1, tol);
  size_t b = state_index(traj, t2, tol);
  if (a >= b) throw std::invalid_argument("flux_balance: window collapsed onto one snapshot");
  double ra = traj.states[a].t - eta, rb = traj.states[b].t - eta;
  if (ra < -1e-9 || rb > g.r_max + 1e-9)
    throw std::invalid_argument("flux_balance: cone leaves the grid");

  Series flux;
  flux.reserve(b - a + 1);
  for (size_t idx = a; idx <= b; ++idx) {
    const FieldState& s = traj.states[idx];
    flux.emplace_back(s.t, flux_integrand(s, g, mp, k, s.t - eta));
  }

  FluxBalance out;
  out.interior_change = local_energy(traj.states[b], g, mp, 0.0, std::max(0.0, rb)) -
                        local_energy(traj.states[a], g, mp, 0.0, std::max(0.0, ra));
  out.surface_flux = time_trapezoid(flux);
  out.total_energy = energy(traj.states.front(), g, mp);
  return out;
}

ConeSeries cone_series(const Trajectory& traj, double eta) {
  const RadialGrid& g = traj.grid;
  const ModelParams& mp = traj.params;
  DerivedConstants k = derive(mp);

  ConeSeries out;
  double acc = 0.0;
  bool have_prev = false;
  double prev_t = 0.0, prev_f = 0.0;
  for (const FieldState& s : traj.states) {
    double r = s.t - eta;
    if (r < 0.0 || r > g.r_max + 1e-9) {
      have_prev = false;
      continue;
    }
    r = std::min(r, g.r_max);
    double f = flux_integrand(s, g, mp, k, r);
    if (have_prev) acc += 0.5 * (prev_f + f) * (s.t - prev_t);
    prev_t = s.t;
    prev_f = f;
    have_prev = true;
    out.interior_energy.emplace_back(s.t, local_energy(s, g, mp, 0.0, r));
    out.cumulative_flux.emplace_back(s.t, acc);
  }
  return out;
}

double cone_monotonicity(const Trajectory& traj, double eta) {
  const RadialGrid& g = traj.grid;
  double worst = 0.0;
  bool have_prev = false;
  double prev = 0.0;
  for (const FieldState& s : traj.states) {
    double r = s.t - eta;
    if (r <= 0.0 || r > g.r_max + 1e-9) {
      have_prev = false;
      continue;
    }
    double e = local_energy(s, g, traj.params, 0.0, std::min(r, g.r_max));
    if (have_prev) worst = std::min(worst, e - prev);
    prev = e;
    have_prev = true;
  }
  return worst;
}

double backward_cone_monotonicity(const Trajectory& traj, double s_apex) {
  const RadialGrid& g = traj.grid;
  double worst = 0.0;
  bool have_prev = false;
  double prev = 0.0;
  for (const FieldState& s : traj.states) {
    double r = s_apex - s.t;
    if (s.t > s_apex || r <= 0.0 || r > g.r_max + 1e-9) {
      have_prev = false;
      continue;
    }
    double e = local_energy(s, g, traj.params, 0.0, std::min(r, g.r_max));
    if (have_prev) worst = std::max(worst, e - prev);
    prev = e;
    have_prev = true;
  }
  return worst;
}

ConeSurfaceBounds cone_surface_bounds(const Trajectory& traj, double eta) {
  const RadialGrid& g = traj.grid;
  const ModelParams& mp = traj.params;
  DerivedConstants k = derive(mp);

  Series flux, hardy;
  for (const FieldState& s : traj.states) {
    double r = s.t - eta;
    if (r < 0.0 || r > g.r_max + 1e-9) continue;
    r = std::min(r, g.r_max);
    flux.emplace_back(s.t, flux_integrand(s, g, mp, k, r));
    double u = sample_point(s, g, r).u;
    hardy.emplace_back(s.t, k.c_d * u * u * std::pow(r, mp.d - 3));
  }

  ConeSurfaceBounds out;
  out.flux_total = time_trapezoid(flux);
  out.hardy_term = time_trapezoid(hardy);
  out.total_energy = energy(traj.states.front(), g, mp);
  return out;
}

MorawetzSeries morawetz_series(const Trajectory& traj, double R) {
  const RadialGrid& g = traj.grid;
  const ModelParams& mp = traj.params;
  if (mp.zeta != -1)
    throw std::invalid_argument("morawetz_report: defocusing runs only");
  if (!(R > 0.0) || R >= g.r_max)
    throw std::invalid_argument("morawetz_report: R outside (0, r_max)");
  DerivedConstants k = derive(mp);
  double c_p = ((mp.d - 1) * (mp.p - 1.0) - 2.0) / (mp.p + 1.0);
  double pre_in = 1.0 / (2.0 * R);
  double pre_sp = (mp.d - 1) / (4.0 * R * R);
  double pre_ex = (mp.d - 1) * (mp.p - 1.0) / (2.0 * (mp.p + 1.0));

  MorawetzSeries out;
  out.total_energy = energy(traj.states.front(), g, mp);
  Eigen::ArrayXd rpow = g.r.pow(mp.d - 1);
  double acc_in = 0.0, acc_sp = 0.0, acc_ex = 0.0;
  double prev_t = 0.0, prev_in = 0.0, prev_sp = 0.0, prev_ex = 0.0;
  bool have_prev = false;
  for (const FieldState& s : traj.states) {
    Eigen::ArrayXd ur = radial_derivative(s.u, g.h);
    Eigen::ArrayXd upp = s.u.abs().pow(mp.p + 1.0);
    Eigen::ArrayXd inner = k.c_d * rpow * (ur.square() + s.ut.square() + c_p * upp);
    SampledIntegral inner_int(std::move(inner), 0.0, g.h);
    double f_in = inner_int.between(0.0, R);

    double uR = sample_point(s, g, R).u;
    double f_sp = k.c_d * std::pow(R, mp.d - 1) * uR * uR;

    // |u|^{p+1}/|x| against c_d r^{d-1} dr
    Eigen::ArrayXd outer(g.size());
    outer[0] = 0.0;
    outer.tail(g.n) = k.c_d * upp.tail(g.n) * g.r.tail(g.n).pow(mp.d - 2);
    SampledIntegral outer_int(std::move(outer), 0.0, g.h);
    double f_ex = outer_int.between(R, g.r_max);

    if (have_prev) {
      double dt = s.t - prev_t;
      acc_in += 0.5 * (prev_in + f_in) * dt;
      acc_sp += 0.5 * (prev_sp + f_sp) * dt;
      acc_ex += 0.5 * (prev_ex + f_ex) * dt;
    }
    prev_t = s.t;
    prev_in = f_in;
    prev_sp = f_sp;
    prev_ex = f_ex;
    have_prev = true;
    out.interior.emplace_back(s.t, pre_in * acc_in);
    out.sphere.emplace_back(s.t, pre_sp * acc_sp);
    out.exterior.emplace_back(s.t, pre_ex * acc_ex);
  }
  return out;
}

MorawetzReport morawetz_report(const Trajectory& traj, double R) {
  MorawetzSeries series = morawetz_series(traj, R);
  MorawetzReport out;
  out.interior = series.interior.empty() ? 0.0 : series.interior.back().second;
  out.sphere = series.sphere.empty() ? 0.0 : series.sphere.back().second;
  out.exterior = series.exterior.empty() ? 0.0 : series.exterior.back().second;
  out.total_energy = series.total_energy;
  return out;
}

EnergyDistribution energy_distribution_check(const Trajectory& traj, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("energy_distribution_check: R must be positive");
  const RadialGrid& g = traj.grid;
  Series inside, outside;
  for (const FieldState& s : traj.states) {
    double e_in = local_energy(s, g, traj.params, 0.0, std::min(R, g.r_max));
    double e_tot = energy(s, g, traj.params);
    inside.emplace_back(s.t, e_in);
    outside.emplace_back(s.t, e_tot - e_in);
  }
  double t_lo = traj.states.front().t, t_hi = traj.states.back().t;
  EnergyDistribution out;
  out.lhs = integrate_series(inside, t_lo, -R) + integrate_series(inside, R, t_hi);
  out.rhs = integrate_series(outside, -R, R);
  return out;
}

Trajectory merge_trajectories(const Trajectory& backward, const Trajectory& forward) {
  if (backward.grid.n != forward.grid.n ||
      std::abs(backward.grid.h - forward.grid.h) > 1e-12)
    throw std::invalid_argument("merge_trajectories: grids differ");
  if (backward.params.d != forward.params.d || backward.params.p != forward.params.p ||
      backward.params.zeta != forward.params.zeta)
    throw std::invalid_argument("merge_trajectories: params differ");
  if (backward.states.empty() || forward.states.empty() ||
      std::abs(backward.states.back().t - forward.states.front().t) > 1e-9)
    throw std::invalid_argument("merge_trajectories: trajectories do not meet");

  Trajectory out = forward;
  out.states.clear();
  out.states.reserve(backward.states.size() + forward.states.size() - 1);
  out.states.insert(out.states.end(), backward.states.begin(), backward.states.end() - 1);
  out.states.insert(out.states.end(), forward.states.begin(), forward.states.end());
  return out;
}

Series potential_series(const Trajectory& traj) {
  if (traj.params.zeta == 0)
    throw std::invalid_argument("potential_series: linear runs carry no potential");
  Series out;
  out.reserve(traj.states.size());
  for (const FieldState& s : traj.states)
    out.emplace_back(s.t, potential_integral(s, traj.grid, traj.params));
  return out;
}

PointwiseRatios pointwise_ratio(const FieldState& s, const RadialGrid& g, const ModelParams& mp) {
  DerivedConstants k = derive(mp);
  PointwiseRatios out;
  out.bound1 = 1.0 / std::sqrt(k.c_d * (mp.d - 2));
  out.bound2 = std::pow(std::exp2(2.0 * mp.d + mp.p + 1.0) / (k.c_d * k.c_d),
                        1.0 / (mp.p + 3.0));

  double grad = std::sqrt(h1_seminorm_sq(s.u, g, mp));
  double lp_pow = lebesgue_norm_pow(s.u, g, mp, mp.p + 1.0);  // ||u||_{p+1}^{p+1}
  out.ratio1_max = 0.0;
  out.ratio2_max = 0.0;
  if (grad == 0.0) return out;
  double denom2 = std::pow(grad, 2.0 / (mp.p + 3.0)) *
                  std::pow(lp_pow, 1.0 / (mp.p + 3.0));  // = ||u||_{p+1}^{(p+1)/(p+3)}

  for (int j = 1; j < g.size(); ++j) {
    double r = g.r[j], au = std::abs(s.u[j]);
    out.ratio1_max = std::max(out.ratio1_max, au * std::pow(r, 0.5 * (mp.d - 2)) / grad);
    if (denom2 > 0.0)
      out.ratio2_max = std::max(
          out.ratio2_max, au * std::pow(r, 2.0 * (mp.d - 1) / (mp.p + 3.0)) / denom2);
  }
  return out;
}

Series exterior_deficit(const Trajectory& nonlinear, const Trajectory& free_wave, double eta) {
  const RadialGrid& g = nonlinear.grid;
  if (g.n != free_wave.grid.n || std::abs(g.h - free_wave.grid.h) > 1e-12)
    throw std::invalid_argument("exterior_deficit: grids differ");
  if (nonlinear.states.size() != free_wave.states.size())
    throw std::invalid_argument("exterior_deficit: snapshot counts differ");
  DerivedConstants k = derive(nonlinear.params);
  Eigen::ArrayXd rpow = g.r.pow(nonlinear.params.d - 1);

  Series out;
  out.reserve(nonlinear.states.size());
  for (size_t i = 0; i < nonlinear.states.size(); ++i) {
    const FieldState& a = nonlinear.states[i];
    const FieldState& b = free_wave.states[i];
    if (std::abs(a.t - b.t) > 1e-9)
      throw std::invalid_argument("exterior_deficit: snapshot times differ");
    Eigen::ArrayXd dur = radial_derivative(a.u - b.u, g.h);
    Eigen::ArrayXd density =
        0.5 * k.c_d * rpow * (dur.square() + (a.ut - b.ut).square());
    SampledIntegral integral(std::move(density), 0.0, g.h);
    double r_lo = std::clamp(a.t - eta, 0.0, g.r_max);
    out.emplace_back(a.t, integral.between(r_lo, g.r_max));
  }
  return out;
}

FullDeficit full_deficit(const Trajectory& nonlinear, const Trajectory& free_wave,
                         const RadiationProfile& profile) {
  FullDeficit out;
  // eta beyond the last snapshot time makes the exterior region the whole grid
  double eta_all = nonlinear.states.back().t + 1.0;
  out.series = exterior_deficit(nonlinear, free_wave, eta_all);
  DerivedConstants k = derive(nonlinear.params);
  out.total_energy = energy(nonlinear.states.front(), nonlinear.grid, nonlinear.params);
  out.energy_gap = out.total_energy - k.c_d * profile.norm_sq();
  return out;
}

Series interior_decay(const Trajectory& traj, double c, double kappa) {
  if (!(kappa > 0.0) || !(kappa < 1.0))
    throw std::invalid_argument("interior_decay: kappa outside (0, 1)");
  if (!(c > 0.0)) throw std::invalid_argument("interior_decay: c must be positive");
  Series out;
  for (const FieldState& s : traj.states) {
    if (s.t <= 0.0) continue;
    double rho = s.t - c * std::pow(s.t, 1.0 - kappa);
    if (rho <= 0.0) continue;
    out.emplace_back(s.t, local_energy(s, traj.grid, traj.params, 0.0,
                                       std::min(rho, traj.grid.r_max)));
  }
  return out;
}

Series middle_band_deficit(const Trajectory& traj, const RadiationProfile& profile, double c,
                           double gamma, double R) {
  if (!(c > 0.0) || gamma < 0.0)
    throw std::invalid_argument("middle_band_deficit: need c > 0 and gamma >= 0");
  Series out;
  const RadialGrid& g = traj.grid;
  for (const FieldState& s : traj.states) {
    if (s.t <= 0.0) continue;
    double r_lo = s.t - c * std::pow(s.t, gamma);
    double r_hi = std::min(g.r_max, s.t + R);
    if (r_lo < g.h || r_lo >= r_hi) continue;
    out.emplace_back(s.t, radiation_deficit(s, g, traj.params, profile, r_lo, r_hi));
  }
  return out;
}

DecayFit fit_decay(const Series& series, double t_lo, double t_hi) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, v] : series)
    if (t >= t_lo && t <= t_hi && t > 0.0 && v > 0.0)
      pts.emplace_back(std::log(t), std::log(v));
  if (pts.size() < 8)
    throw std::invalid_argument("fit_decay: need at least 8 positive samples in the window");

  double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  double vxx = sxx - sx * sx / n;
  double vxy = sxy - sx * sy / n;
  double vyy = syy - sy * sy / n;

  DecayFit out;
  out.exponent = vxy / vxx;
  out.intercept = (sy - out.exponent * sx) / n;
  out.r2 = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
  out.t_lo = std::exp(pts.front().first);
  out.t_hi = std::exp(pts.back().first);
  out.samples = static_cast<int>(pts.size());
  return out;
}

DiagnosticsRecord::DiagnosticsRecord() {
  double nan = std::numeric_limits<double>::quiet_NaN();
  t = e_total = e_interior = flux_residual = nan;
  morawetz_interior = morawetz_sphere = morawetz_exterior = nan;
  potential = exterior_deficit = full_deficit = nan;
  pointwise_ratio1 = pointwise_ratio2 = nan;
}

}  // namespace rwave
