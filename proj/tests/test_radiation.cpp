#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rwave/grid.hpp"
#include "rwave/radiation.hpp"
#include "rwave/solver_char.hpp"
#include "rwave/solver_fd.hpp"
#include "support.hpp"

using namespace rwave;

namespace {

// profile sampled from an analytic g on a uniform eta grid
RadiationProfile analytic_profile(double eta_min, double eta_max, double spacing,
                                  const std::function<double(double)>& g) {
  RadiationProfile p;
  p.eta = uniform_eta_grid(eta_min, eta_max, spacing);
  p.g = Eigen::ArrayXd(p.eta.size());
  for (int i = 0; i < p.eta.size(); ++i) p.g[i] = g(p.eta[i]);
  p.quality = Eigen::ArrayXd::Zero(p.eta.size());
  p.t_extract = 0.0;
  return p;
}

}  // namespace

TEST_CASE("uniform_eta_grid snaps ends onto spacing multiples") {
  Eigen::ArrayXd eta = uniform_eta_grid(-3.14, 2.71, 0.25);
  REQUIRE(eta.size() >= 2);
  for (int i = 0; i < eta.size(); ++i) {
    double k = eta[i] / 0.25;
    CHECK(std::abs(k - std::round(k)) < 1e-10);
  }
  for (int i = 1; i < eta.size(); ++i)
    CHECK(eta[i] - eta[i - 1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::abs(eta[0] - (-3.14)) <= 0.25);
  CHECK(std::abs(eta[eta.size() - 1] - 2.71) <= 0.25);
  CHECK_THROWS_AS(uniform_eta_grid(1.0, -1.0, 0.1), std::invalid_argument);
}

TEST_CASE("extraction recovers the exact d=3 linear radiation profile") {
  // for u0 = phi even, u1 = 0 in d = 3 the profile is exactly
  // g(eta) = -(phi(|eta|) + |eta| phi'(|eta|)) / 2 at any finite time
  ModelParams mp{3, 3.0, 0};
  double amp = 1.0, width = 1.0;
  auto g_true = [&](double eta) {
    double a = std::abs(eta);
    double phi = amp * std::exp(-(a / width) * (a / width));
    double dphi = -2.0 * a / (width * width) * phi;
    return -0.5 * (phi + a * dphi);
  };

  RadialGrid grid = make_grid(30.0, 1500);
  FieldState init = testsupport::gaussian_state(grid, amp, width);
  ReducedState red = to_reduced(init, grid, mp);
  std::vector<double> t_list = {10.0, 12.0};
  ReducedTrajectory run = evolve_reduced_at(red, t_list, grid, mp);

  Eigen::ArrayXd eta = uniform_eta_grid(-4.0, 4.0, 0.1);
  RadiationProfile prof = extract_radiation(run, eta, t_list, mp);
  CHECK(prof.t_extract == doctest::Approx(12.0).epsilon(1e-12));

  double err = 0.0;
  for (int i = 0; i < eta.size(); ++i) err = std::max(err, std::abs(prof.g[i] - g_true(eta[i])));
  CHECK(err < 2e-3);
  // d=3 has no tail: the two extraction times agree to rounding
  CHECK(prof.quality.abs().maxCoeff() < 1e-10);

  double oracle = testsupport::integrate([&](double e) { return g_true(e) * g_true(e); },
                                         -4.0, 4.0, 1e-13);
  CHECK(prof.norm_sq() == doctest::Approx(oracle).epsilon(2e-3));
}

TEST_CASE("extraction rejects bad sample times") {
  ModelParams mp{3, 3.0, 0};
  RadialGrid grid = make_grid(20.0, 400);
  ReducedState red = to_reduced(testsupport::gaussian_state(grid, 1.0, 1.0), grid, mp);
  ReducedTrajectory run = evolve_reduced_at(red, {6.0, 8.0}, grid, mp);
  Eigen::ArrayXd eta = uniform_eta_grid(-2.0, 2.0, 0.1);
  CHECK_THROWS_AS(extract_radiation(run, eta, {6.0}, mp), std::invalid_argument);
  // r = t - eta beyond r_max
  Eigen::ArrayXd wide = uniform_eta_grid(-30.0, 2.0, 0.1);
  CHECK_THROWS_AS(extract_radiation(run, wide, {6.0, 8.0}, mp), std::invalid_argument);
}

TEST_CASE("free-wave approximant satisfies its own derivative identities") {
  ModelParams mp{4, 7.0 / 3.0, 0};
  auto gfun = [](double e) { return std::exp(-e * e); };
  RadiationProfile prof = analytic_profile(-8.0, 8.0, 0.05, gfun);
  FreeWave fw(prof, mp);

  const double dt = 1e-5;
  for (double r : {3.0, 7.5, 12.0}) {
    for (double t : {4.0, 9.0}) {
      double scale = std::max(1.0, std::abs(fw.u(r, t)));
      CHECK(std::abs((fw.u(r, t + dt) - fw.u(r, t - dt)) / (2 * dt) - fw.ut(r, t)) <
            1e-4 * scale);
      CHECK(std::abs((fw.u(r + dt, t) - fw.u(r - dt, t)) / (2 * dt) - fw.ur(r, t)) <
            1e-4 * scale);
    }
  }
  CHECK(fw.u(0.0, 5.0) == 0.0);

  // beyond the wave zone u carries the static tail profile r^{-q} * tail
  double tail = fw.tail_amplitude();
  CHECK(tail == doctest::Approx(-std::sqrt(std::acos(-1.0))).epsilon(1e-3));
  double t = 2.0, r = 2.0 + 8.0 + 5.0;  // t - r < eta_min, t + r > eta_max
  double q = 1.5;
  CHECK(fw.u(r, t) * std::pow(r, q) == doctest::Approx(tail).epsilon(1e-12));

  // sample() agrees with the pointwise evaluators
  RadialGrid grid = make_grid(20.0, 640);
  FieldState s = fw.sample(grid, 6.0);
  CHECK(s.t == 6.0);
  CHECK(s.u[320] == doctest::Approx(fw.u(grid.r[320], 6.0)).epsilon(1e-12));
  CHECK(s.ut[160] == doctest::Approx(fw.ut(grid.r[160], 6.0)).epsilon(1e-12));
}

TEST_CASE("isometry between data norm and radiation profile in d=3") {
  ModelParams mp{3, 3.0, 0};
  RadialGrid grid = make_grid(30.0, 1500);
  FieldState data = testsupport::gaussian_state(grid, 1.0, 1.0);
  IsometryCheck chk = isometry_residual(data, grid, mp, 10.0, -6.0, 6.0);
  CHECK(chk.lhs > 0.0);
  CHECK(chk.rhs > 0.0);
  CHECK(chk.relative_gap() < 0.02);
}

TEST_CASE("inversion rejects domains too small for the backward cone") {
  ModelParams mp{3, 3.0, 0};
  auto gfun = [](double e) { return std::exp(-e * e); };
  RadiationProfile prof = analytic_profile(-4.0, 4.0, 0.05, gfun);
  RadialGrid small = make_grid(10.0, 200);  // 2*10 + 4 + 2 = 26 > 10
  try {
    invert_radiation(prof, 10.0, small, mp);
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("r_max") != std::string::npos);
  }
}

TEST_CASE("inverted data reproduces the requested profile on re-extraction") {
  ModelParams mp{3, 3.0, 0};
  auto gfun = [](double e) { return std::exp(-2.0 * e * e) * (1.0 + 0.5 * e); };
  RadiationProfile prof = analytic_profile(-4.0, 4.0, 0.05, gfun);

  RadialGrid grid = make_grid(28.0, 1400);
  FieldState data = invert_radiation(prof, 10.0, grid, mp);
  CHECK(data.t == 0.0);

  ReducedState red = to_reduced(data, grid, mp);
  std::vector<double> t_list = {12.0, 14.0};
  ReducedTrajectory run = evolve_reduced_at(red, t_list, grid, mp);
  RadiationProfile back = extract_radiation(run, prof.eta, t_list, mp);

  double num = std::sqrt((back.g - prof.g).square().sum());
  double den = std::sqrt(prof.g.square().sum());
  CHECK(num / den < 0.10);
}

TEST_CASE("radiation deficit of the approximant decays in time") {
  ModelParams mp{5, 2.0, 0};
  auto gfun = [](double e) { return std::exp(-e * e) * e; };
  RadiationProfile prof = analytic_profile(-4.0, 4.0, 0.05, gfun);
  FreeWave fw(prof, mp);

  RadialGrid grid = make_grid(60.0, 3000);
  FieldState early = fw.sample(grid, 12.0);
  FieldState late = fw.sample(grid, 50.0);
  double d_early = radiation_deficit(early, grid, mp, prof, 12.0 - 4.0, 12.0 + 4.0);
  double d_late = radiation_deficit(late, grid, mp, prof, 50.0 - 4.0, 50.0 + 4.0);
  CHECK(d_late < d_early);
  // the defect is carried by a term ~ 1/t, so the band integral decays ~ 1/t^2
  double expect = (12.0 / 50.0) * (12.0 / 50.0);
  CHECK(d_late < 1.25 * expect * d_early);
}
