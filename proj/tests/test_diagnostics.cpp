#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rwave/diagnostics.hpp"
#include "rwave/rng.hpp"
#include "rwave/solver_fd.hpp"
#include "support.hpp"

using namespace rwave;

namespace {

Trajectory gaussian_run(const ModelParams& mp, double r_max, int n, double t_end, int stride) {
  RadialGrid g = make_grid(r_max, n);
  EvolutionConfig cfg;
  cfg.t_end = t_end;
  cfg.snapshot_stride = stride;
  return evolve(testsupport::gaussian_state(g, 1.0, 1.0), cfg, g, mp);
}

}  // namespace

TEST_CASE("integrate_series matches the trapezoid rule and clips") {
  Series s = {{0.0, 1.0}, {1.0, 3.0}, {2.0, 2.0}, {4.0, 0.0}};
  CHECK(integrate_series(s, 0.0, 4.0) == doctest::Approx(2.0 + 2.5 + 2.0).epsilon(1e-14));
  // linear interpolant evaluated on a sub-interval is exact
  CHECK(integrate_series(s, 0.5, 1.0) == doctest::Approx(0.5 * 0.5 * (2.0 + 3.0)).epsilon(1e-14));
  // clipping outside the sample range adds nothing
  CHECK(integrate_series(s, -5.0, 10.0) == doctest::Approx(integrate_series(s, 0.0, 4.0)).epsilon(1e-14));
  CHECK(integrate_series(s, 3.0, 3.0) == 0.0);
  CHECK(integrate_series({}, 0.0, 1.0) == 0.0);
}

TEST_CASE("flux balance is trivially zero on the zero state") {
  ModelParams mp{4, 7.0 / 3.0, -1};
  RadialGrid g = make_grid(10.0, 200);
  FieldState zero;
  zero.t = 0.0;
  zero.u = Eigen::ArrayXd::Zero(g.size());
  zero.ut = Eigen::ArrayXd::Zero(g.size());
  EvolutionConfig cfg;
  cfg.t_end = 2.0;
  cfg.snapshot_stride = 10;
  Trajectory traj = evolve(zero, cfg, g, mp);
  FluxBalance fb = flux_balance(traj, -1.0, 0.0, 2.0);
  CHECK(fb.interior_change == 0.0);
  CHECK(fb.surface_flux == 0.0);
  CHECK(fb.residual_rel() == 0.0);
}

TEST_CASE("flux identity residual shrinks with the mesh") {
  ModelParams mp{4, 7.0 / 3.0, -1};
  std::vector<double> residuals;
  for (int n : {800, 1600}) {
    Trajectory traj = gaussian_run(mp, 16.0, n, 5.0, 4);
    FluxBalance fb = flux_balance(traj, -1.0, 1.0, 5.0);
    CHECK(fb.total_energy > 0.0);
    // the two sides actually balance
    CHECK(std::abs(fb.residual()) < 0.03 * fb.total_energy);
    residuals.push_back(fb.residual_rel());
  }
  CHECK(residuals[1] < residuals[0]);
  CHECK(residuals[1] < 1e-2);
}

TEST_CASE("flux balance rejects cones leaving the domain") {
  ModelParams mp{3, 3.0, -1};
  Trajectory traj = gaussian_run(mp, 8.0, 160, 2.0, 10);
  CHECK_THROWS_AS(flux_balance(traj, -7.0, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("forward cone energies increase and backward cone energies decrease") {
  ModelParams mp{3, 3.0, -1};
  Trajectory coarse = gaussian_run(mp, 12.0, 600, 5.0, 5);
  Trajectory traj = gaussian_run(mp, 12.0, 1200, 5.0, 5);
  double e_total = energy(traj.states.front(), traj.grid, traj.params);

  CHECK(cone_monotonicity(traj, -1.0) >= -kDefaultTolerances.cone_slack * e_total);
  // the shrinking ball ends on the origin cell, where truncation noise
  // concentrates; it falls off at third order, so check that too
  double bwd_coarse = backward_cone_monotonicity(coarse, 5.0);
  double bwd_fine = backward_cone_monotonicity(traj, 5.0);
  CHECK(bwd_fine <= kDefaultTolerances.cone_slack * e_total);
  CHECK(bwd_fine < 0.3 * bwd_coarse);

  ConeSeries cs = cone_series(traj, -1.0);
  REQUIRE(cs.interior_energy.size() >= 3);
  // running flux accounts for the running interior change
  double first_e = cs.interior_energy.front().second;
  for (size_t i = 0; i < cs.interior_energy.size(); ++i) {
    double balance = cs.interior_energy[i].second - first_e - cs.cumulative_flux[i].second;
    CHECK(std::abs(balance) < 0.02 * e_total);
  }
}

TEST_CASE("cone surface flux stays below the total energy and Hardy term is controlled") {
  ModelParams mp{4, 7.0 / 3.0, -1};
  Trajectory traj = gaussian_run(mp, 14.0, 700, 6.0, 5);
  ConeSurfaceBounds b = cone_surface_bounds(traj, -0.5);
  CHECK(b.total_energy > 0.0);
  CHECK(b.flux_total >= 0.0);
  CHECK(b.flux_within());
  CHECK(b.hardy_term >= 0.0);
  CHECK(b.hardy_term < 10.0 * b.total_energy);
}

TEST_CASE("Morawetz functional stays below twice the energy with nonnegative parts") {
  ModelParams mp{3, 3.0, -1};
  Trajectory traj = gaussian_run(mp, 12.0, 600, 5.0, 5);
  MorawetzReport rep = morawetz_report(traj, 1.0);
  CHECK(rep.interior >= 0.0);
  CHECK(rep.sphere >= 0.0);
  CHECK(rep.exterior >= 0.0);
  CHECK(rep.sum() > 0.0);
  CHECK(rep.within());

  MorawetzSeries ser = morawetz_series(traj, 1.0);
  CHECK(ser.interior.back().second == doctest::Approx(rep.interior).epsilon(1e-14));
  CHECK(ser.sphere.back().second == doctest::Approx(rep.sphere).epsilon(1e-14));
  CHECK(ser.exterior.back().second == doctest::Approx(rep.exterior).epsilon(1e-14));
  // cumulative components never decrease
  for (size_t i = 1; i < ser.interior.size(); ++i) {
    CHECK(ser.interior[i].second >= ser.interior[i - 1].second - 1e-15);
    CHECK(ser.exterior[i].second >= ser.exterior[i - 1].second - 1e-15);
  }
}

TEST_CASE("energy distribution: interior-late mass is bounded by exterior-early mass") {
  ModelParams mp{5, 2.0, -1};
  RadialGrid g = make_grid(12.0, 600);
  FieldState init = testsupport::gaussian_state(g, 1.0, 1.0);
  EvolutionConfig fwd;
  fwd.t_end = 4.0;
  fwd.snapshot_stride = 5;
  EvolutionConfig bwd = fwd;
  bwd.t_end = -4.0;
  Trajectory merged = merge_trajectories(evolve_backward(init, bwd, g, mp),
                                         evolve(init, fwd, g, mp));
  CHECK(merged.states.front().t == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(merged.states.back().t == doctest::Approx(4.0).epsilon(1e-12));
  for (size_t i = 1; i < merged.states.size(); ++i)
    CHECK(merged.states[i].t > merged.states[i - 1].t);

  double e_total = energy(init, g, mp);
  EnergyDistribution ed = energy_distribution_check(merged, 2.0);
  CHECK(ed.lhs >= 0.0);
  CHECK(ed.rhs >= 0.0);
  CHECK(ed.lhs <= ed.rhs + kDefaultTolerances.distribution_slack * e_total);
}

TEST_CASE("merge_trajectories rejects mismatched pieces") {
  ModelParams mp{3, 3.0, -1};
  Trajectory a = gaussian_run(mp, 8.0, 160, 1.0, 10);
  Trajectory b = gaussian_run(mp, 8.0, 320, 1.0, 10);
  CHECK_THROWS_AS(merge_trajectories(a, b), std::invalid_argument);
  // meeting times differ
  Trajectory c = gaussian_run(mp, 8.0, 160, 2.0, 10);
  CHECK_THROWS_AS(merge_trajectories(a, c), std::invalid_argument);
}

TEST_CASE("potential integral disperses and linear runs have none") {
  ModelParams mp{4, 7.0 / 3.0, -1};
  Trajectory traj = gaussian_run(mp, 14.0, 700, 6.0, 10);
  Series pot = potential_series(traj);
  CHECK(pot.front().second > 0.0);
  CHECK(pot.back().second < 0.1 * pot.front().second);

  ModelParams lin{4, 7.0 / 3.0, 0};
  Trajectory ltraj = gaussian_run(lin, 8.0, 160, 0.5, 10);
  CHECK_THROWS_AS(potential_series(ltraj), std::invalid_argument);
}

TEST_CASE("pointwise ratios honor their closed-form bounds") {
  for (int d : {3, 4, 5, 6}) {
    ModelParams mp{d, 0.5 * (conformal_exponent(d) + critical_exponent(d)), -1};
    DerivedConstants k = derive(mp);
    RadialGrid g = make_grid(20.0, 1000);
    for (unsigned long seed : {11UL, 12UL, 13UL}) {
      FieldState s;
      s.t = 0.0;
      s.u = Eigen::ArrayXd::Zero(g.size());
      s.ut = Eigen::ArrayXd::Zero(g.size());
      for (int b = 0; b < 5; ++b) {
        double amp = uniform_in(seed, 3 * b, -1.0, 1.0);
        double center = uniform_in(seed, 3 * b + 1, 0.0, 5.0);
        double wid = uniform_in(seed, 3 * b + 2, 0.3, 1.5);
        s.u += amp * ((-((g.r - center) / wid).square()).exp() +
                      (-((g.r + center) / wid).square()).exp());
      }
      PointwiseRatios pr = pointwise_ratio(s, g, mp);
      CHECK(pr.bound1 == doctest::Approx(1.0 / std::sqrt(k.c_d * (d - 2))).epsilon(1e-14));
      CHECK(pr.bound2 ==
            doctest::Approx(std::pow(std::exp2(2.0 * d + mp.p + 1.0) / (k.c_d * k.c_d),
                                     1.0 / (mp.p + 3.0)))
                .epsilon(1e-14));
      CHECK(pr.ratio1_max <= pr.bound1);
      CHECK(pr.ratio2_max <= pr.bound2);
      CHECK(pr.ratio1_max > 0.0);
    }
  }
  // zero state degrades gracefully
  ModelParams mp{4, 7.0 / 3.0, -1};
  RadialGrid g = make_grid(5.0, 100);
  FieldState z;
  z.t = 0.0;
  z.u = Eigen::ArrayXd::Zero(g.size());
  z.ut = Eigen::ArrayXd::Zero(g.size());
  PointwiseRatios pr = pointwise_ratio(z, g, mp);
  CHECK(pr.ratio1_max == 0.0);
  CHECK(pr.ratio2_max == 0.0);
}

TEST_CASE("a trajectory has zero exterior deficit against itself") {
  ModelParams mp{4, 7.0 / 3.0, -1};
  Trajectory traj = gaussian_run(mp, 10.0, 200, 2.0, 10);
  Series def = exterior_deficit(traj, traj, -1.0);
  REQUIRE(!def.empty());
  for (const auto& [t, v] : def) CHECK(v == 0.0);

  Trajectory other = gaussian_run(mp, 10.0, 400, 2.0, 10);
  CHECK_THROWS_AS(exterior_deficit(traj, other, -1.0), std::invalid_argument);
}

TEST_CASE("fit_decay recovers synthetic power laws") {
  Series exact, constant, noisy;
  for (int i = 0; i < 60; ++i) {
    double t = 2.0 + i;
    exact.emplace_back(t, 3.0 * std::pow(t, -0.5));
    constant.emplace_back(t, 7.0);
    noisy.emplace_back(t, std::pow(t, -2.0) * (1.0 + 0.01 * (uniform01(99, i) - 0.5)));
  }
  DecayFit f1 = fit_decay(exact, 2.0, 61.0);
  CHECK(f1.exponent == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(f1.r2 > 0.999999);
  CHECK(f1.samples == 60);

  DecayFit f2 = fit_decay(constant, 2.0, 61.0);
  CHECK(std::abs(f2.exponent) < 1e-12);

  DecayFit f3 = fit_decay(noisy, 2.0, 61.0);
  CHECK(f3.exponent == doctest::Approx(-2.0).epsilon(0.05));
  CHECK(f3.r2 > 0.99);

  CHECK_THROWS_AS(fit_decay(exact, 50.0, 55.0), std::invalid_argument);  // < 8 samples
}

TEST_CASE("shrinking-ball interior energy series skips nonpositive radii") {
  ModelParams mp{3, 3.0, -1};
  Trajectory traj = gaussian_run(mp, 12.0, 600, 5.0, 5);
  Series dec = interior_decay(traj, 1.0, 0.5);
  REQUIRE(!dec.empty());
  // radius t - sqrt(t) is positive only for t > 1
  CHECK(dec.front().first > 1.0);
  for (const auto& [t, v] : dec) CHECK(v >= 0.0);
}

TEST_CASE("diagnostics records start as quiet NaN") {
  DiagnosticsRecord rec;
  CHECK(std::isnan(rec.t));
  CHECK(std::isnan(rec.e_total));
  CHECK(std::isnan(rec.flux_residual));
  CHECK(std::isnan(rec.pointwise_ratio2));
}
