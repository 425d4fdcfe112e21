#include "rwave/solver_fd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rwave {

const FieldState& Trajectory::at_time(double t, double tol) const {
  const FieldState* best = nullptr;
  double gap = tol;
  for (const auto& s : states) {
    const double d = std::abs(s.t - t);
    if (d <= gap) {
      gap = d;
      best = &s;
    }
  }
  if (!best)
    throw std::out_of_range("Trajectory::at_time: no snapshot within " + std::to_string(tol) +
                            " of t = " + std::to_string(t));
  return *best;
}

DivergenceError::DivergenceError(double t_, int node_, double value_)
    : std::runtime_error("solution diverged at t = " + std::to_string(t_) + ", node " +
                         std::to_string(node_) + " (|value| = " + std::to_string(value_) + ")"),
      t(t_), node(node_), value(value_) {}

namespace {

// Flux-form weights for (r^{d-1} u_r)_r / r^{d-1}: at node j the half-node
// coefficients reduce to the h-free ratios ((j +- 1/2)/j)^{d-1}.  The
// non-conservative u_rr + (d-1)/r u_r stencil puts a negative weight on
// u_{j-1} once (d-1)/2 > 1 and feeds a growing origin mode for d >= 5; the
// flux form is symmetric under the r^{d-1} volume weights, so every mode
// stays oscillatory.  Same second-order truncation error.
struct LaplaceStencil {
  Eigen::ArrayXd up, down;  // sized m-2, for nodes 1..m-2
};

LaplaceStencil make_stencil(Eigen::Index m, int d) {
  LaplaceStencil st;
  st.up.resize(m - 2);
  st.down.resize(m - 2);
  for (Eigen::Index j = 1; j <= m - 2; ++j) {
    st.up[j - 1] = std::pow((j + 0.5) / j, d - 1);
    st.down[j - 1] = std::pow((j - 0.5) / j, d - 1);
  }
  return st;
}

void accelerate(const Eigen::ArrayXd& u, const RadialGrid& g, const ModelParams& mp,
                const LaplaceStencil& st, Eigen::ArrayXd& acc) {
  const Eigen::Index m = g.size();
  const double h2 = g.h * g.h;
  acc.segment(1, m - 2) =
      (st.up * (u.segment(2, m - 2) - u.segment(1, m - 2)) -
       st.down * (u.segment(1, m - 2) - u.segment(0, m - 2))) /
      h2;
  // origin: even extension; the half-cell flux balance lands on the
  // l'Hopital value Delta u(0) = d * u_rr(0)
  acc[0] = mp.d * 2.0 * (u[1] - u[0]) / h2;
  acc[m - 1] = 0.0;  // held node
  if (mp.zeta != 0) {
    for (Eigen::Index j = 0; j < m - 1; ++j)
      acc[j] += mp.zeta * power_nonlinearity(u[j], mp.p);
  }
}

}  // namespace

Eigen::ArrayXd acceleration(const FieldState& s, const RadialGrid& g, const ModelParams& mp) {
  Eigen::ArrayXd acc(g.size());
  accelerate(s.u, g, mp, make_stencil(g.size(), mp.d), acc);
  return acc;
}

namespace {

void check_finite(const FieldState& s, double t) {
  for (const Eigen::ArrayXd* a : {&s.u, &s.ut}) {
    for (Eigen::Index j = 0; j < a->size(); ++j) {
      const double v = (*a)[j];
      if (!std::isfinite(v) || std::abs(v) > kDivergenceGuard)
        throw DivergenceError(t, static_cast<int>(j), std::abs(v));
    }
  }
}

Trajectory run(const FieldState& initial, const EvolutionConfig& config, const RadialGrid& g,
               const ModelParams& mp, bool backward) {
  if (auto err = validate(mp)) throw std::invalid_argument("evolve: " + *err);
  if (!(config.cfl > 0.0)) throw std::invalid_argument("evolve: cfl must be positive");
  if (config.snapshot_stride < 1)
    throw std::invalid_argument("evolve: snapshot_stride must be >= 1");
  if (initial.u.size() != g.size() || initial.ut.size() != g.size())
    throw std::invalid_argument("evolve: state size does not match the grid");
  const double span = backward ? initial.t - config.t_end : config.t_end - initial.t;
  if (!(span > 0.0))
    throw std::invalid_argument(backward ? "evolve_backward: t_end must precede the state time"
                                         : "evolve: t_end must follow the state time");

  const double dt_cap = config.cfl * g.h;
  const auto steps = static_cast<long>(std::ceil(span / dt_cap - 1e-12));
  const double dt_mag = span / steps;  // <= cfl*h, lands exactly on t_end
  const double dt = backward ? -dt_mag : dt_mag;

  Trajectory traj{mp, g, config, {}};
  traj.states.reserve(static_cast<size_t>(steps / config.snapshot_stride) + 2);

  FieldState s = initial;
  s.ut[g.n] = 0.0;  // the held node never moves
  check_finite(s, s.t);
  traj.states.push_back(s);

  const Eigen::Index m = g.size();
  const LaplaceStencil st = make_stencil(m, mp.d);
  Eigen::ArrayXd k1v(m), k2v(m), k3v(m), k4v(m), u2(m), u3(m), u4(m);

  for (long step = 1; step <= steps; ++step) {
    // classic 4-stage scheme for (u, ut); acceleration depends on u only
    accelerate(s.u, g, mp, st, k1v);
    u2 = s.u + (0.5 * dt) * s.ut;
    accelerate(u2, g, mp, st, k2v);
    u3 = s.u + (0.5 * dt) * s.ut + (0.25 * dt * dt) * k1v;
    accelerate(u3, g, mp, st, k3v);
    u4 = s.u + dt * s.ut + (0.5 * dt * dt) * k2v;
    accelerate(u4, g, mp, st, k4v);

    s.u += dt * s.ut + (dt * dt / 6.0) * (k1v + k2v + k3v);
    s.ut += (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    s.t = initial.t + step * dt;
    check_finite(s, s.t);

    if (step % config.snapshot_stride == 0 || step == steps) traj.states.push_back(s);
  }

  if (backward) std::reverse(traj.states.begin(), traj.states.end());
  return traj;
}

}  // namespace

Trajectory evolve(const FieldState& initial, const EvolutionConfig& config, const RadialGrid& g,
                  const ModelParams& mp) {
  return run(initial, config, g, mp, /*backward=*/false);
}

Trajectory evolve_backward(const FieldState& initial, const EvolutionConfig& config,
                           const RadialGrid& g, const ModelParams& mp) {
  return run(initial, config, g, mp, /*backward=*/true);
}

}  // namespace rwave
