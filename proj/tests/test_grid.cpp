#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rwave/grid.hpp"
#include "support.hpp"

using namespace rwave;

TEST_CASE("make_grid lays out nodes and rejects bad sizes") {
  RadialGrid g = make_grid(10.0, 100);
  CHECK(g.size() == 101);
  CHECK(g.h == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g.r[0] == 0.0);
  CHECK(g.r[100] == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(g.r[37] == doctest::Approx(3.7).epsilon(1e-14));
  CHECK_THROWS_AS(make_grid(-1.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(10.0, 8), std::invalid_argument);
}

TEST_CASE("radial_derivative is exact on quadratics") {
  RadialGrid g = make_grid(5.0, 50);
  Eigen::ArrayXd f = 2.0 * g.r.square() - 3.0 * g.r + 1.0;
  Eigen::ArrayXd df = radial_derivative(f, g.h);
  for (int j = 0; j <= 50; ++j)
    CHECK(df[j] == doctest::Approx(4.0 * g.r[j] - 3.0).epsilon(1e-12));
}

TEST_CASE("radial_derivative converges at second order on smooth samples") {
  std::vector<double> hs, errs;
  for (int n : {64, 128, 256}) {
    RadialGrid g = make_grid(4.0, n);
    Eigen::ArrayXd f = (g.r * 1.3).sin();
    Eigen::ArrayXd df = radial_derivative(f, g.h);
    double err = 0.0;
    for (int j = 0; j <= n; ++j)
      err = std::max(err, std::abs(df[j] - 1.3 * std::cos(1.3 * g.r[j])));
    hs.push_back(g.h);
    errs.push_back(err);
  }
  CHECK(testsupport::convergence_order(hs, errs) > 1.8);
}

TEST_CASE("SampledIntegral matches trapezoid and is additive") {
  RadialGrid g = make_grid(3.0, 120);
  Eigen::ArrayXd f = (-(g.r - 1.0).square()).exp();
  SampledIntegral si(f, 0.0, g.h);
  CHECK(si.total() == doctest::Approx(trapezoid(f, g.h)).epsilon(1e-14));
  CHECK(si.up_to(3.0) == doctest::Approx(si.total()).epsilon(1e-14));
  CHECK(si.up_to(10.0) == doctest::Approx(si.total()).epsilon(1e-14));  // clamped
  CHECK(si.up_to(-1.0) == 0.0);
  // additivity over an off-node split
  double a = 0.4137, b = 1.777, c = 2.5001;
  CHECK(si.between(a, c) ==
        doctest::Approx(si.between(a, b) + si.between(b, c)).epsilon(1e-13));
  // agreement with an independent quadrature of the interpolant on one cell
  double cell = si.between(0.5 * g.h, 1.5 * g.h);
  double direct = 0.5 * g.h * (0.5 * (f[0] + f[1])) * 0 +  // placeholder, computed below
                  0.0;
  (void)direct;
  double mid0 = 0.5 * (f[0] + f[1]), mid1 = 0.5 * (f[1] + f[2]);
  CHECK(cell == doctest::Approx(0.5 * g.h * (0.5 * (mid0 + f[1]) + 0.5 * (f[1] + mid1)))
                    .epsilon(1e-12));
}

TEST_CASE("to_reduced and from_reduced round-trip") {
  ModelParams mp{5, 2.0, -1};
  RadialGrid g = make_grid(8.0, 400);
  FieldState s = testsupport::gaussian_state(g, 1.3, 1.1);
  s.ut = 0.2 * (-(g.r / 2.0).square()).exp();
  ReducedState red = to_reduced(s, g, mp);
  CHECK(red.t == s.t);
  // w = r^2 u in d = 5
  for (int j : {1, 50, 200, 400})
    CHECK(red.w[j] == doctest::Approx(std::pow(g.r[j], 2.0) * s.u[j]).epsilon(1e-12));
  FieldState back = from_reduced(red, g, mp);
  for (int j = 1; j <= 400; ++j) {
    CHECK(back.u[j] == doctest::Approx(s.u[j]).epsilon(1e-9));
    CHECK(back.ut[j] == doctest::Approx(s.ut[j]).epsilon(1e-9));
  }
  // origin recovered by extrapolation: second order in h
  CHECK(back.u[0] == doctest::Approx(s.u[0]).epsilon(1e-3));
  CHECK(back.ut[0] == doctest::Approx(s.ut[0]).epsilon(1e-3));
}

TEST_CASE("energy matches an independent quadrature") {
  for (int d : {3, 4, 5, 6}) {
    ModelParams mp{d, 0.5 * (conformal_exponent(d) + critical_exponent(d)), -1};
    RadialGrid g = make_grid(12.0, 2400);
    double amp = 0.7, width = 1.4;
    FieldState s = testsupport::gaussian_state(g, amp, width);
    double cd = sphere_area(d);
    double p = mp.p;
    auto dens = [&](double r) {
      double u = amp * std::exp(-(r / width) * (r / width));
      double ur = -2.0 * r / (width * width) * u;
      return cd * std::pow(r, d - 1) *
             (0.5 * ur * ur + std::pow(std::abs(u), p + 1.0) / (p + 1.0));
    };
    double oracle = testsupport::integrate(dens, 0.0, 12.0, 1e-12);
    CHECK(energy(s, g, mp) == doctest::Approx(oracle).epsilon(2e-4));
  }
}

TEST_CASE("energy drops the potential for the linear model") {
  ModelParams nl{4, 7.0 / 3.0, -1};
  ModelParams lin{4, 7.0 / 3.0, 0};
  RadialGrid g = make_grid(10.0, 1000);
  FieldState s = testsupport::gaussian_state(g, 1.0, 1.0);
  double diff = energy(s, g, nl) - energy(s, g, lin);
  CHECK(diff == doctest::Approx(potential_integral(s, g, nl) / (nl.p + 1.0)).epsilon(1e-10));
  CHECK(diff > 0.0);
}

TEST_CASE("local_energy tiles the full energy") {
  ModelParams mp{6, 1.9, -1};
  RadialGrid g = make_grid(9.0, 900);
  FieldState s = testsupport::bump_state(g, 1.0, 1.0, 4.0);
  s.ut = 0.3 * (-(g.r / 1.5).square()).exp();
  double whole = local_energy(s, g, mp, 0.0, 9.0);
  CHECK(whole == doctest::Approx(energy(s, g, mp)).epsilon(1e-12));
  double parts = local_energy(s, g, mp, 0.0, 2.345) + local_energy(s, g, mp, 2.345, 6.1) +
                 local_energy(s, g, mp, 6.1, 9.0);
  CHECK(parts == doctest::Approx(whole).epsilon(1e-12));
  CHECK(local_energy(s, g, mp, 5.0, 5.0) == 0.0);
}

TEST_CASE("weighted energy with zero exponent doubles the plain energy") {
  ModelParams mp{3, 3.0, -1};
  RadialGrid g = make_grid(7.0, 700);
  FieldState s = testsupport::gaussian_state(g, 0.9, 1.2);
  CHECK(weighted_energy(s, g, mp, 0.0) ==
        doctest::Approx(2.0 * energy(s, g, mp)).epsilon(1e-12));
  // positive exponents weigh the tail more
  CHECK(weighted_energy(s, g, mp, 0.5) > weighted_energy(s, g, mp, 0.0));
}

TEST_CASE("norm helpers agree with each other") {
  ModelParams mp{4, 7.0 / 3.0, -1};
  RadialGrid g = make_grid(10.0, 1000);
  FieldState s = testsupport::gaussian_state(g, 1.0, 1.3);
  s.ut = 0.4 * (-(g.r - 2.0).square()).exp();
  CHECK(energy_norm_sq(s, g, mp) ==
        doctest::Approx(h1_seminorm_sq(s.u, g, mp) + l2_norm_sq(s.ut, g, mp)).epsilon(1e-12));
  CHECK(potential_integral(s, g, mp) ==
        doctest::Approx(lebesgue_norm_pow(s.u, g, mp, mp.p + 1.0)).epsilon(1e-12));
}

TEST_CASE("first-order splitting of the H1 seminorm closes under refinement") {
  ModelParams mp{5, 2.2, -1};
  std::vector<double> hs, gaps;
  for (int n : {500, 1000, 2000}) {
    RadialGrid g = make_grid(10.0, n);
    FieldState s = testsupport::gaussian_state(g, 1.0, 1.4);
    SplitNorm sn = h1_splitting(s, g, mp);
    CHECK(sn.split > 0.0);
    CHECK(sn.plain > 0.0);
    hs.push_back(g.h);
    gaps.push_back(sn.relative_gap());
  }
  CHECK(gaps[2] < gaps[0]);
  CHECK(gaps[2] < 1e-3);
}
