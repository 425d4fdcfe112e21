#pragma once

#include <string>
#include <vector>

#include "rwave/grid.hpp"
#include "rwave/params.hpp"
#include "rwave/radiation.hpp"
#include "rwave/solver_fd.hpp"

namespace rwave {

// One slack/threshold table shared by the library checks, the verify verdicts
// and the acceptance gate, so every tolerance has a single home.
struct Tolerances {
  double cone_slack = 1e-6;            // monotonicity violations >= -slack * E
  double backward_cone_coeff = 20.0;   // shrinking balls end on the origin cell,
                                       // whose truncation noise scales as coeff*h^3*E
  double inequality_slack = 1e-3;      // upper bounds hold up to (1 + slack)
  double deficit_monotone_slack = 1e-3;  // "eventually nonincreasing" wiggle * E
  double flux_residual_rel = 1e-2;     // |balance residual| / E at h = 0.01
  double drift_rel = 1e-3;             // relative energy drift over a run
  double isometry_rel = 2e-2;          // radiation isometry gap
  double roundtrip_rel = 5e-2;         // profile -> data -> profile L^2 error
  double energy_gap_frac = 5e-2;       // (E - c_d ||g||^2) / E by late time
  double full_deficit_frac = 0.15;     // late full deficit / initial
  double exterior_deficit_frac = 0.10; // late exterior deficit / early
  double potential_min_frac = 5e-2;    // min over last third / initial
  double distribution_slack = 1e-2;    // lhs <= rhs + slack * E
};

inline constexpr Tolerances kDefaultTolerances{};

using Series = std::vector<std::pair<double, double>>;  // (t, value)

// Integral over [a, b] of the piecewise-linear interpolant of a time series.
double integrate_series(const Series& series, double a, double b);

struct FluxBalance {
  double interior_change;  // E(t2; ball) - E(t1; ball), both cones r = t - eta
  double surface_flux;     // cone surface integral between the two times
  double total_energy;
  double residual() const { return interior_change - surface_flux; }
  double residual_rel() const { return total_energy == 0.0 ? 0.0 : std::abs(residual()) / total_energy; }
};

// Both sides of the energy flux identity across the cone r = t - eta between
// snapshot times nearest to t1 and t2.  The surface side is parametrized by t
// (the sqrt(2) cone area factor cancels against the surface-measure prefactor).
FluxBalance flux_balance(const Trajectory& traj, double eta, double t1, double t2);

// Interior energy E(t; ball(t - eta)) and the cumulative cone-surface flux
// per snapshot; their pointwise difference (relative to the first snapshot
// where the cone is inside the grid) is the running balance residual.
struct ConeSeries {
  Series interior_energy;
  Series cumulative_flux;
};

ConeSeries cone_series(const Trajectory& traj, double eta);

// Most negative increment of E(t; ball(t - eta)) over consecutive snapshots
// (>= 0 means the interior energy never decreased).
double cone_monotonicity(const Trajectory& traj, double eta);

// Most positive increment of E(t; ball(s - t)) over consecutive snapshots
// with t <= s (<= 0 means the backward-cone interior never grew).
double backward_cone_monotonicity(const Trajectory& traj, double s);

struct ConeSurfaceBounds {
  double flux_total;   // full cone flux accumulated over the simulated window
  double hardy_term;   // cone integral of u^2 / r^2 against the same measure
  double total_energy;
  // the flux telescopes interior energies in [0, E], so the window total
  // stays below E up to quadrature slack
  bool flux_within(const Tolerances& tol = kDefaultTolerances) const {
    return flux_total <= total_energy * (1.0 + tol.inequality_slack);
  }
};

ConeSurfaceBounds cone_surface_bounds(const Trajectory& traj, double eta);

struct MorawetzReport {
  double interior;  // (1/2R)  * int int_{|x|<R} (|grad u|^2 + u_t^2 + c_p |u|^{p+1})
  double sphere;    // (d-1)/(4R^2) * int int_{|x|=R} u^2
  double exterior;  // (d-1)(p-1)/(2(p+1)) * int int_{|x|>R} |u|^{p+1}/|x|
  double total_energy;
  double sum() const { return interior + sphere + exterior; }
  // windowed LHS against 2E, which bounds even the infinite-window sum
  bool within(const Tolerances& tol = kDefaultTolerances) const {
    return sum() <= 2.0 * total_energy * (1.0 + tol.inequality_slack);
  }
};

// The three-term space-time functional over the simulated window; defocusing
// runs only.  c_p = ((d-1)(p-1) - 2)/(p+1).
MorawetzReport morawetz_report(const Trajectory& traj, double R);

// Running version of the same: cumulative components per snapshot, already
// carrying their prefactors, so the last entries reproduce morawetz_report.
struct MorawetzSeries {
  Series interior, sphere, exterior;
  double total_energy;
};

MorawetzSeries morawetz_series(const Trajectory& traj, double R);

struct EnergyDistribution {
  double lhs;  // time integral over |t| in (R, T] of energy inside radius R
  double rhs;  // time integral over |t| <= R of energy outside radius R
};

// Needs a trajectory covering [-T, T]; build one with merge_trajectories.
EnergyDistribution energy_distribution_check(const Trajectory& traj, double R);

// Glue a backward and a forward run from the same t=0 data into one
// increasing-time trajectory (the duplicate t=0 snapshot is dropped).
Trajectory merge_trajectories(const Trajectory& backward, const Trajectory& forward);

// (t, c_d int |u|^{p+1} r^{d-1} dr) per snapshot; defocusing runs only.
Series potential_series(const Trajectory& traj);

struct PointwiseRatios {
  double ratio1_max;  // max over r >= h of |u| r^{(d-2)/2} / ||u||_{H^1}
  double ratio2_max;  // max of |u| r^{2(d-1)/(p+3)} / (||u||^{2/(p+3)} ||u||_{p+1}^{(p+1)/(p+3)})
  double bound1;      // c_d^{-1/2} (d-2)^{-1/2}, from the Cauchy-Schwarz proof line
  double bound2;      // (2^{2d+p+1} / c_d^2)^{1/(p+3)}, carried through the same proof
};

PointwiseRatios pointwise_ratio(const FieldState& s, const RadialGrid& g, const ModelParams& mp);

// Deficit of the nonlinear run against a reference free wave, integrated over
// the exterior r > t - eta (dx measure).  Both trajectories must share the
// grid and snapshot times.
Series exterior_deficit(const Trajectory& nonlinear, const Trajectory& free_wave, double eta);

struct FullDeficit {
  Series series;      // whole-space deficit per snapshot
  double energy_gap;  // E(nonlinear initial) - c_d ||g||^2
  double total_energy;
};

FullDeficit full_deficit(const Trajectory& nonlinear, const Trajectory& free_wave,
                         const RadiationProfile& profile);

// Energy inside radius t - c * t^{1-kappa} per snapshot (skipped while the
// radius is nonpositive); kappa in (0,1).
Series interior_decay(const Trajectory& traj, double c, double kappa);

// Outgoing-wave defect integrated over the band (t - c t^gamma, t + R) per
// snapshot; gamma in [0, 2 beta].
Series middle_band_deficit(const Trajectory& traj, const RadiationProfile& profile, double c,
                           double gamma, double R);

struct DecayFit {
  double exponent;
  double intercept;
  double r2;
  double t_lo, t_hi;
  int samples;
};

// Least-squares line on (log t, log value) using the positive samples with
// t in [t_lo, t_hi]; throws unless at least 8 remain.
DecayFit fit_decay(const Series& series, double t_lo, double t_hi);

// Time-stamped scalar observables for CSV streaming; quiet NaN marks a field
// that a given scenario did not request.
struct DiagnosticsRecord {
  double t;
  double e_total;
  double e_interior;
  double flux_residual;
  double morawetz_interior, morawetz_sphere, morawetz_exterior;
  double potential;
  double exterior_deficit;
  double full_deficit;
  double pointwise_ratio1;
  double pointwise_ratio2;
  DiagnosticsRecord();
};

struct Verdict {
  std::string name;
  bool pass;
  double value;
  double bound;
};

}  // namespace rwave
