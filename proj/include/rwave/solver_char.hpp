#pragma once

#include <vector>

#include "rwave/grid.hpp"
#include "rwave/params.hpp"

namespace rwave {

// Characteristic-mesh solver for the reduced variables (w, v_plus, v_minus)
// with dt = h: v_plus hops one node outward per step and v_minus one node
// inward, both exactly, so only the source integral along each characteristic
// segment is approximated (midpoint rule on a half-step predictor).
//
// Closures: w(0) = 0 forces v_plus(0) = -v_minus(0) (odd reflection), and the
// inflow v_minus(r_max) = 0 models no incoming radiation.  The first radial
// cell integrates its singular source in closed form under the smooth-origin
// ansatz w = a r^{(d-1)/2} with a fitted from the two nearest nodes.

// Right-hand side f of (d/dt -+ d/dr) v_pm = f in reduced variables:
// f = -lambda w / r^2 + zeta sign(w) |w|^p r^{-(p-1)(d-1)/2}.
double source_term(double r, double w, const ModelParams& mp, const DerivedConstants& k);

// One step of size h.  Exposed mainly for stepping-level tests.
ReducedState char_step(const ReducedState& s, const RadialGrid& g, const ModelParams& mp);

struct ReducedTrajectory {
  ModelParams params;
  RadialGrid grid;
  std::vector<ReducedState> states;  // strictly increasing times

  const ReducedState& at_time(double t, double tol) const;
};

// Evolve to t_end (a multiple of h within rounding), recording every
// snapshot_stride-th step plus the first and last.
ReducedTrajectory evolve_reduced(const ReducedState& initial, double t_end, int snapshot_stride,
                                 const RadialGrid& g, const ModelParams& mp);

// Same evolution but recording only at the requested times (each a multiple
// of h; must be increasing).  Keeps memory flat on long extraction runs.
ReducedTrajectory evolve_reduced_at(const ReducedState& initial, const std::vector<double>& times,
                                    const RadialGrid& g, const ModelParams& mp);

struct CharacteristicTrace {
  double v_start;   // v_plus sampled at (t1 - eta, t1)
  double v_end;     // v_plus sampled at (t2 - eta, t2)
  double integral;  // source integrated along the characteristic t - r = eta
  double residual() const { return v_end - v_start - integral; }
};

// Follows the outgoing characteristic through the recorded snapshots.  Both
// t1 and t2 must be snapshot times and t1 - eta >= h.
CharacteristicTrace trace_characteristic(const ReducedTrajectory& traj, double eta, double t1,
                                         double t2);

}  // namespace rwave
