#include "rwave/solver_char.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rwave {

double source_term(double r, double w, const ModelParams& mp, const DerivedConstants& k) {
  double f = 0.0;
  if (k.lambda != 0.0) f -= k.lambda * w / (r * r);
  if (mp.zeta != 0 && w != 0.0)
    f += mp.zeta * power_nonlinearity(w, mp.p) * std::pow(r, -(mp.p - 1.0) * (mp.d - 1.0) / 2.0);
  return f;
}

namespace {

// Source integral over the first cell (characteristic crossing r in (0, h)):
// with w = a r^q, q = (d-1)/2, both terms are integrable powers of r.
double origin_cell_source(double a, double h, const ModelParams& mp,
                          const DerivedConstants& k) {
  const double q = (mp.d - 1) / 2.0;
  double integral = 0.0;
  if (k.lambda != 0.0)  // d >= 4, so q > 1
    integral -= k.lambda * a * std::pow(h, q - 1.0) / (q - 1.0);
  if (mp.zeta != 0 && a != 0.0)
    integral += mp.zeta * power_nonlinearity(a, mp.p) * std::pow(h, q + 1.0) / (q + 1.0);
  return integral;
}

// Per-cell source integrals for one step: cell_src[j] approximates the source
// integrated along either characteristic crossing the cell (r_{j-1}, r_j).
Eigen::ArrayXd cell_sources(const Eigen::ArrayXd& w_half, const RadialGrid& g,
                            const ModelParams& mp, const DerivedConstants& k) {
  const double q = (mp.d - 1) / 2.0;
  const int n = g.n;
  const double h = g.h;
  Eigen::ArrayXd cell_src(n + 1);
  cell_src[0] = 0.0;  // unused
  const double r1q = std::pow(g.r[1], q), r2q = std::pow(g.r[2], q);
  const double a = (w_half[1] * r1q + w_half[2] * r2q) / (r1q * r1q + r2q * r2q);
  cell_src[1] = origin_cell_source(a, h, mp, k);
  for (int j = 2; j <= n; ++j) {
    const double r_mid = (j - 0.5) * h;
    const double w_mid = 0.5 * (w_half[j - 1] + w_half[j]);
    cell_src[j] = h * source_term(r_mid, w_mid, mp, k);
  }
  return cell_src;
}

}  // namespace

ReducedState char_step(const ReducedState& s, const RadialGrid& g, const ModelParams& mp) {
  const DerivedConstants k = derive(mp);
  const int n = g.n;
  const double h = g.h;

  const Eigen::ArrayXd wt = 0.5 * (s.v_plus + s.v_minus);
  const Eigen::ArrayXd w_half = s.w + (0.5 * h) * wt;
  const Eigen::ArrayXd cell_src = cell_sources(w_half, g, mp, k);

  ReducedState out;
  out.t = s.t + h;
  out.w.resize(n + 1);
  out.v_plus.resize(n + 1);
  out.v_minus.resize(n + 1);

  // exact transport by one node, plus the source accumulated over the cell
  out.v_plus.segment(1, n) = s.v_plus.segment(0, n) + cell_src.segment(1, n);
  out.v_minus.segment(0, n) = s.v_minus.segment(1, n) + cell_src.segment(1, n);
  out.v_minus[n] = 0.0;            // no incoming radiation
  out.v_plus[0] = -out.v_minus[0];  // odd reflection keeps w(0) = 0

  const Eigen::ArrayXd wt_new = 0.5 * (out.v_plus + out.v_minus);
  out.w = s.w + (0.5 * h) * (wt + wt_new);
  out.w[0] = 0.0;
  return out;
}

const ReducedState& ReducedTrajectory::at_time(double t, double tol) const {
  const ReducedState* best = nullptr;
  double gap = tol;
  for (const auto& s : states) {
    const double d = std::abs(s.t - t);
    if (d <= gap) {
      gap = d;
      best = &s;
    }
  }
  if (!best)
    throw std::out_of_range("ReducedTrajectory::at_time: no snapshot within " +
                            std::to_string(tol) + " of t = " + std::to_string(t));
  return *best;
}

namespace {

// Redundant compensated accumulation of the same w increments; a disagreement
// beyond rounding scale means the stepper and its bookkeeping went separate
// ways, which is a bug, not a discretization error.
struct WReconciler {
  Eigen::ArrayXd sum, comp;
  explicit WReconciler(Eigen::Index m) : sum(Eigen::ArrayXd::Zero(m)), comp(Eigen::ArrayXd::Zero(m)) {}

  void accumulate(const Eigen::ArrayXd& increment) {
    const Eigen::ArrayXd y = increment - comp;
    const Eigen::ArrayXd t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }

  void check(const Eigen::ArrayXd& w0, const Eigen::ArrayXd& w, double t) const {
    const double scale = std::max(w.abs().maxCoeff(), 1e-30);
    const double drift = (w0 + sum - w).abs().maxCoeff();
    if (drift > 1e-6 * scale)
      throw std::logic_error("reduced solver: w drifted from its accumulated increments by " +
                             std::to_string(drift) + " at t = " + std::to_string(t));
  }
};

template <typename Record>
ReducedTrajectory drive(const ReducedState& initial, long steps, const RadialGrid& g,
                        const ModelParams& mp, Record&& record) {
  if (auto err = validate(mp)) throw std::invalid_argument("evolve_reduced: " + *err);
  if (initial.w.size() != g.size() || initial.v_plus.size() != g.size() ||
      initial.v_minus.size() != g.size())
    throw std::invalid_argument("evolve_reduced: state size does not match the grid");

  ReducedTrajectory traj{mp, g, {}};
  ReducedState s = initial;
  record(traj, s, 0, steps);

  WReconciler reconciler(g.size());
  for (long step = 1; step <= steps; ++step) {
    ReducedState next = char_step(s, g, mp);
    reconciler.accumulate((next.w - s.w).eval());
    s = std::move(next);
    if (step % 100 == 0) reconciler.check(initial.w, s.w, s.t);
    record(traj, s, step, steps);
  }
  return traj;
}

long step_count(const ReducedState& initial, double t_end, const RadialGrid& g) {
  const double span = t_end - initial.t;
  if (!(span > 0.0)) throw std::invalid_argument("evolve_reduced: t_end must follow the state time");
  const auto steps = static_cast<long>(std::llround(span / g.h));
  if (std::abs(steps * g.h - span) > 1e-9 * std::max(1.0, std::abs(span)))
    throw std::invalid_argument("evolve_reduced: t_end - t0 must be a multiple of h");
  return steps;
}

}  // namespace

ReducedTrajectory evolve_reduced(const ReducedState& initial, double t_end, int snapshot_stride,
                                 const RadialGrid& g, const ModelParams& mp) {
  if (snapshot_stride < 1)
    throw std::invalid_argument("evolve_reduced: snapshot_stride must be >= 1");
  const long steps = step_count(initial, t_end, g);
  return drive(initial, steps, g, mp,
               [&](ReducedTrajectory& traj, const ReducedState& s, long step, long total) {
                 if (step % snapshot_stride == 0 || step == total) traj.states.push_back(s);
               });
}

ReducedTrajectory evolve_reduced_at(const ReducedState& initial, const std::vector<double>& times,
                                    const RadialGrid& g, const ModelParams& mp) {
  if (times.empty()) throw std::invalid_argument("evolve_reduced_at: no record times");
  const long steps = step_count(initial, times.back(), g);
  return drive(initial, steps, g, mp,
               [&](ReducedTrajectory& traj, const ReducedState& s, long, long) {
                 for (double t : times)
                   if (std::abs(s.t - t) < 0.5 * g.h) {
                     traj.states.push_back(s);
                     break;
                   }
               });
}

namespace {

double interp(const Eigen::ArrayXd& f, const RadialGrid& g, double r) {
  if (r <= 0.0) return f[0];
  if (r >= g.r_max) return f[g.n];
  const auto j = static_cast<Eigen::Index>(std::floor(r / g.h));
  const double s = r / g.h - j;
  return (1.0 - s) * f[j] + s * f[j + 1];
}

}  // namespace

CharacteristicTrace trace_characteristic(const ReducedTrajectory& traj, double eta, double t1,
                                         double t2) {
  if (!(t1 < t2)) throw std::invalid_argument("trace_characteristic: need t1 < t2");
  const RadialGrid& g = traj.grid;
  if (t1 - eta < g.h)
    throw std::invalid_argument("trace_characteristic: characteristic too close to the origin");
  if (t2 - eta > g.r_max)
    throw std::invalid_argument("trace_characteristic: characteristic leaves the grid");
  const DerivedConstants k = derive(traj.params);

  const ReducedState& s1 = traj.at_time(t1, 0.5 * g.h);
  const ReducedState& s2 = traj.at_time(t2, 0.5 * g.h);

  CharacteristicTrace out;
  out.v_start = interp(s1.v_plus, g, s1.t - eta);
  out.v_end = interp(s2.v_plus, g, s2.t - eta);

  // trapezoid over the snapshots that fall inside [t1, t2]
  out.integral = 0.0;
  double prev_t = 0.0, prev_f = 0.0;
  bool have_prev = false;
  for (const auto& s : traj.states) {
    if (s.t < s1.t - 1e-12 || s.t > s2.t + 1e-12) continue;
    const double r = s.t - eta;
    const double f = source_term(r, interp(s.w, g, r), traj.params, k);
    if (have_prev) out.integral += 0.5 * (s.t - prev_t) * (prev_f + f);
    prev_t = s.t;
    prev_f = f;
    have_prev = true;
  }
  return out;
}

}  // namespace rwave
