#pragma once

#include <vector>

#include "rwave/grid.hpp"
#include "rwave/params.hpp"
#include "rwave/solver_char.hpp"

namespace rwave {

// Sampled outgoing radiation profile g(eta) on a uniform eta grid, together
// with a per-node quality estimate (difference between the last two
// extraction times, which bounds the remaining Cauchy tail).
struct RadiationProfile {
  Eigen::ArrayXd eta;      // uniform, increasing
  Eigen::ArrayXd g;
  Eigen::ArrayXd quality;
  double t_extract = 0.0;  // largest sample time used

  double deta() const { return eta.size() > 1 ? eta[1] - eta[0] : 0.0; }
  double norm_sq() const;  // trapezoid of g^2 over the eta grid
};

// Uniform eta nodes over [eta_min, eta_max] with the given spacing; both ends
// are snapped onto multiples of the spacing so characteristic samples land on
// mesh nodes.
Eigen::ArrayXd uniform_eta_grid(double eta_min, double eta_max, double spacing);

// g(eta) = v_plus(t - eta, t)/2 at the largest time of t_list; the quality
// column compares against the second-largest time.  Works for linear and
// defocusing runs alike; every requested time must be recorded in `run`.
RadiationProfile extract_radiation(const ReducedTrajectory& run, const Eigen::ArrayXd& eta,
                                   const std::vector<double>& t_list, const ModelParams& mp);

// Outgoing free-wave approximant built from a profile:
//   u(r,t) = -r^{-(d-1)/2} * integral of g over [t-r, t+r],
// so u_t = r^{-q}(g(t-r) - g(t+r)) and u_r follows by differentiating the
// prefactor and the endpoints.  The stored profile is tapered to zero with a
// cubic ramp over 5% of the window at each end (compact support), linearly
// interpolated in between and zero outside.
class FreeWave {
 public:
  FreeWave(const RadiationProfile& profile, const ModelParams& mp);

  double u(double r, double t) const;   // r = 0 returns 0
  double ut(double r, double t) const;
  double ur(double r, double t) const;
  FieldState sample(const RadialGrid& g, double t) const;

  double g_at(double eta) const;
  double g_integral(double a, double b) const;
  double tail_amplitude() const;  // -integral of g: coefficient of the static
                                  // r^{-(d-1)/2} profile beyond r = t + eta_max
  const Eigen::ArrayXd& tapered() const { return g_; }

 private:
  Eigen::ArrayXd eta_, g_, cum_;
  double deta_, q_;
};

FreeWave approximate_free_wave(const RadiationProfile& profile, const ModelParams& mp);

// Candidate free-wave data (u0, u1) at t = 0 whose forward evolution carries
// the prescribed radiation profile: sample the approximant at t_match, then
// run the linear field solver backward to t = 0.  Requires
// r_max >= 2 t_match + max|eta| + 2 so the backward cone stays clean.
FieldState invert_radiation(const RadiationProfile& profile, double t_match,
                            const RadialGrid& g, const ModelParams& mp, double cfl = 0.25);

struct IsometryCheck {
  double lhs;  // ||g||^2 of the extracted profile
  double rhs;  // ||(u0,u1)||^2 in H^1 x L^2, divided by 2 c_d
  double relative_gap() const;
};

// Extracts the radiation profile of the linear evolution of `data` and
// compares its L^2 norm against the scaled data norm (they agree in the
// continuum).  eta window and extraction time are caller-chosen.
IsometryCheck isometry_residual(const FieldState& data, const RadialGrid& g,
                                const ModelParams& mp, double t_extract, double eta_min,
                                double eta_max);

// Band integral (plain dr measure) of
//   |r^q u_r + g(t-r)|^2 + |r^q u_t - g(t-r)|^2,  q = (d-1)/2,
// over r in [r_lo, r_hi]: the pointwise defect of the state against a purely
// outgoing wave with profile g.  Vanishes in the limit for free waves.
double radiation_deficit(const FieldState& s, const RadialGrid& g, const ModelParams& mp,
                         const RadiationProfile& profile, double r_lo, double r_hi);

}  // namespace rwave
