#include "rwave/radiation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rwave/solver_fd.hpp"

namespace rwave {

namespace {

double interp_at(const Eigen::ArrayXd& f, const RadialGrid& g, double r) {
  if (r <= 0.0) return f[0];
  if (r >= g.r_max) return f[g.n];
  const auto j = static_cast<Eigen::Index>(std::floor(r / g.h));
  const double s = r / g.h - j;
  return (1.0 - s) * f[j] + s * f[j + 1];
}

}  // namespace

double RadiationProfile::norm_sq() const {
  if (eta.size() < 2) return 0.0;
  return trapezoid(g.square().eval(), deta());
}

Eigen::ArrayXd uniform_eta_grid(double eta_min, double eta_max, double spacing) {
  if (!(spacing > 0.0) || !(eta_max > eta_min))
    throw std::invalid_argument("uniform_eta_grid: need eta_min < eta_max and spacing > 0");
  const auto j0 = static_cast<long>(std::floor(eta_min / spacing + 1e-9));
  const auto j1 = static_cast<long>(std::ceil(eta_max / spacing - 1e-9));
  Eigen::ArrayXd eta(j1 - j0 + 1);
  for (long j = j0; j <= j1; ++j) eta[j - j0] = j * spacing;
  return eta;
}

RadiationProfile extract_radiation(const ReducedTrajectory& run, const Eigen::ArrayXd& eta,
                                   const std::vector<double>& t_list, const ModelParams& mp) {
  if (auto err = validate(mp)) throw std::invalid_argument("extract_radiation: " + *err);
  if (t_list.size() < 2)
    throw std::invalid_argument("extract_radiation: need at least two sample times");
  std::vector<double> ts = t_list;
  std::sort(ts.begin(), ts.end());
  const double t_last = ts[ts.size() - 1];
  const double t_prev = ts[ts.size() - 2];
  const RadialGrid& g = run.grid;
  const double eta_max = eta[eta.size() - 1];
  if (t_prev - eta_max < 1.0)
    throw std::invalid_argument("extract_radiation: sample times too close to eta_max; need t - eta >= 1");
  if (t_last - eta[0] > g.r_max)
    throw std::invalid_argument("extract_radiation: characteristic sample r = t - eta leaves the grid");

  const ReducedState& last = run.at_time(t_last, 0.5 * g.h);
  const ReducedState& prev = run.at_time(t_prev, 0.5 * g.h);

  RadiationProfile out;
  out.eta = eta;
  out.t_extract = last.t;
  out.g.resize(eta.size());
  out.quality.resize(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double a = 0.5 * interp_at(last.v_plus, g, last.t - eta[i]);
    const double b = 0.5 * interp_at(prev.v_plus, g, prev.t - eta[i]);
    out.g[i] = a;
    out.quality[i] = std::abs(a - b);
  }
  return out;
}

FreeWave::FreeWave(const RadiationProfile& profile, const ModelParams& mp)
    : eta_(profile.eta), g_(profile.g), q_((mp.d - 1) / 2.0) {
  if (auto err = validate(mp)) throw std::invalid_argument("FreeWave: " + *err);
  if (eta_.size() < 4) throw std::invalid_argument("FreeWave: profile too short");
  deta_ = eta_[1] - eta_[0];
  // cubic ramp over 5% of the window at both ends enforces compact support
  const double window = eta_[eta_.size() - 1] - eta_[0];
  const double ramp = 0.05 * window;
  for (Eigen::Index i = 0; i < eta_.size(); ++i) {
    const double from_lo = (eta_[i] - eta_[0]) / ramp;
    const double from_hi = (eta_[eta_.size() - 1] - eta_[i]) / ramp;
    double m = 1.0;
    if (from_lo < 1.0) m *= from_lo <= 0.0 ? 0.0 : from_lo * from_lo * (3.0 - 2.0 * from_lo);
    if (from_hi < 1.0) m *= from_hi <= 0.0 ? 0.0 : from_hi * from_hi * (3.0 - 2.0 * from_hi);
    g_[i] *= m;
  }
  cum_.resize(g_.size());
  cum_[0] = 0.0;
  for (Eigen::Index i = 1; i < g_.size(); ++i)
    cum_[i] = cum_[i - 1] + 0.5 * deta_ * (g_[i - 1] + g_[i]);
}

double FreeWave::g_at(double eta) const {
  const double s = (eta - eta_[0]) / deta_;
  if (s <= 0.0 || s >= static_cast<double>(eta_.size() - 1)) return 0.0;
  const auto i = static_cast<Eigen::Index>(std::floor(s));
  const double f = s - i;
  return (1.0 - f) * g_[i] + f * g_[i + 1];
}

double FreeWave::g_integral(double a, double b) const {
  auto cum_at = [this](double x) {
    const double span = (eta_.size() - 1) * deta_;
    double s = x - eta_[0];
    if (s <= 0.0) return 0.0;
    if (s >= span) return cum_[eta_.size() - 1];
    const auto i = static_cast<Eigen::Index>(std::floor(s / deta_));
    const double frac = s - i * deta_;
    const double slope = (g_[i + 1] - g_[i]) / deta_;
    return cum_[i] + frac * g_[i] + 0.5 * slope * frac * frac;
  };
  return cum_at(b) - cum_at(a);
}

double FreeWave::tail_amplitude() const { return -cum_[eta_.size() - 1]; }

double FreeWave::u(double r, double t) const {
  if (r <= 0.0) return 0.0;
  return -std::pow(r, -q_) * g_integral(t - r, t + r);
}

double FreeWave::ut(double r, double t) const {
  if (r <= 0.0) return 0.0;
  return std::pow(r, -q_) * (g_at(t - r) - g_at(t + r));
}

double FreeWave::ur(double r, double t) const {
  if (r <= 0.0) return 0.0;
  return q_ * std::pow(r, -q_ - 1.0) * g_integral(t - r, t + r) -
         std::pow(r, -q_) * (g_at(t + r) + g_at(t - r));
}

FieldState FreeWave::sample(const RadialGrid& g, double t) const {
  FieldState s;
  s.t = t;
  s.u.resize(g.size());
  s.ut.resize(g.size());
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    s.u[j] = u(g.r[j], t);
    s.ut[j] = ut(g.r[j], t);
  }
  return s;
}

FreeWave approximate_free_wave(const RadiationProfile& profile, const ModelParams& mp) {
  return FreeWave(profile, mp);
}

FieldState invert_radiation(const RadiationProfile& profile, double t_match,
                            const RadialGrid& g, const ModelParams& mp, double cfl) {
  const double eta_span =
      std::max(std::abs(profile.eta[0]), std::abs(profile.eta[profile.eta.size() - 1]));
  const double needed = 2.0 * t_match + eta_span + 2.0;
  if (g.r_max < needed)
    throw std::invalid_argument("invert_radiation: domain too small for the backward cone; need r_max >= " +
                                std::to_string(needed));
  ModelParams linear = mp;
  linear.zeta = 0;
  const FreeWave wave(profile, linear);
  const FieldState matched = wave.sample(g, t_match);
  EvolutionConfig cfg;
  cfg.t_end = 0.0;
  cfg.cfl = cfl;
  cfg.snapshot_stride = 1 << 30;  // only the endpoints matter
  const Trajectory back = evolve_backward(matched, cfg, g, linear);
  return back.states.front();
}

double IsometryCheck::relative_gap() const {
  return rhs == 0.0 ? 0.0 : std::abs(lhs - rhs) / rhs;
}

IsometryCheck isometry_residual(const FieldState& data, const RadialGrid& g,
                                const ModelParams& mp, double t_extract, double eta_min,
                                double eta_max) {
  ModelParams linear = mp;
  linear.zeta = 0;
  const ReducedState initial = to_reduced(data, g, linear);
  // second sample a little earlier quantifies the remaining variation
  const double steps = std::round(t_extract / g.h);
  const double t_last = steps * g.h;
  const double t_prev = std::round(0.9 * steps) * g.h;
  const ReducedTrajectory run =
      evolve_reduced_at(initial, {t_prev, t_last}, g, linear);
  const Eigen::ArrayXd eta = uniform_eta_grid(eta_min, eta_max, g.h);
  const RadiationProfile prof = extract_radiation(run, eta, {t_prev, t_last}, linear);
  IsometryCheck out;
  out.lhs = prof.norm_sq();
  out.rhs = energy_norm_sq(data, g, linear) / (2.0 * sphere_area(mp.d));
  return out;
}

double radiation_deficit(const FieldState& s, const RadialGrid& g, const ModelParams& mp,
                         const RadiationProfile& profile, double r_lo, double r_hi) {
  if (r_hi <= r_lo) return 0.0;
  const double q = (mp.d - 1) / 2.0;
  const Eigen::ArrayXd rq = g.r.pow(q);
  const Eigen::ArrayXd ur = radial_derivative(s.u, g.h);
  const double eta0 = profile.eta[0];
  const double eta1 = profile.eta[profile.eta.size() - 1];
  const double de = profile.deta();
  Eigen::ArrayXd integrand(g.size());
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double eta = s.t - g.r[j];
    double gv = 0.0;
    if (eta > eta0 && eta < eta1) {
      const double x = (eta - eta0) / de;
      const auto i = static_cast<Eigen::Index>(std::floor(x));
      const double f = x - i;
      gv = (1.0 - f) * profile.g[i] + f * profile.g[i + 1];
    }
    const double a = rq[j] * ur[j] + gv;
    const double b = rq[j] * s.ut[j] - gv;
    integrand[j] = a * a + b * b;
  }
  SampledIntegral integral(integrand, 0.0, g.h);
  return integral.between(r_lo, std::min(r_hi, g.r_max));
}

}  // namespace rwave
