#pragma once

#include <stdexcept>
#include <vector>

#include "rwave/grid.hpp"
#include "rwave/params.hpp"

namespace rwave {

// Method-of-lines evolution: second-order differences in r, classic 4-stage
// explicit stepping in t with dt = cfl * h.
//
// Origin: fields are even in r, so Delta u(0) = d * u_rr(0) with a ghost node
// u(-h) = u(h).  Outer edge: the node at r_max is held at its initial value
// (homogeneous Dirichlet under the enlarged-domain contract
// r_max >= data support + t_end + 2, which keeps reflections away from any
// measured region).
struct EvolutionConfig {
  double t_end = 1.0;       // target time; < initial time means backward
  double cfl = 0.25;        // dt = cfl * h (shrunk slightly to land on t_end)
  int snapshot_stride = 1;  // record every k-th step; first/last always kept
};

struct Trajectory {
  ModelParams params;
  RadialGrid grid;
  EvolutionConfig config;
  std::vector<FieldState> states;  // strictly increasing times

  // Snapshot nearest to t; throws std::out_of_range when off by more than tol.
  const FieldState& at_time(double t, double tol) const;
};

// Evolution aborts when any |u| or |u_t| sample exceeds this.
inline constexpr double kDivergenceGuard = 1e8;

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double t, int node, double value);
  double t;
  int node;
  double value;
};

// Nodal acceleration Delta u + zeta |u|^{p-1} u; the r_max node reads 0 (held).
Eigen::ArrayXd acceleration(const FieldState& s, const RadialGrid& g, const ModelParams& mp);

// Forward evolution from initial.t to config.t_end (> initial.t).
Trajectory evolve(const FieldState& initial, const EvolutionConfig& config,
                  const RadialGrid& g, const ModelParams& mp);

// Backward evolution to config.t_end (< initial.t).  Snapshots are still
// reported in increasing time order, so states.front() is the earliest time.
Trajectory evolve_backward(const FieldState& initial, const EvolutionConfig& config,
                           const RadialGrid& g, const ModelParams& mp);

}  // namespace rwave
