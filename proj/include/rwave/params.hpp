#pragma once

#include <optional>
#include <string>

namespace rwave {

// Model: box(u) = zeta |u|^(p-1) u for radial data in R^d, written in the
// convention u_tt - Delta u + (-zeta)|u|^(p-1) u = 0.  zeta = -1 selects the
// defocusing nonlinearity, zeta = 0 the linear wave equation.  Admissible
// ranges: 3 <= d <= 6 and conformal_exponent(d) <= p < critical_exponent(d).
struct ModelParams {
  int d = 3;
  double p = 3.0;
  int zeta = -1;
};

// Constants fixed by (d, p).  All are plain functions of the inputs; derive()
// fills the whole set at once so downstream code never recomputes them.
struct DerivedConstants {
  double lambda;       // (d-1)(d-3)/4, potential strength in the reduced 1d form
  double beta;         // ((d-1)(p-1) - 2) / (2(p+1)), outgoing-variation decay rate
  double kappa0;       // (4 - (d-2)(p-1)) / (p+1); always equals 1 - 2*beta
  double s_p;          // d/2 - 2/(p-1), scaling-critical regularity
  double c_d;          // area of the unit sphere S^{d-1}
  double p_conformal;  // 1 + 4/(d-1), lowest admissible exponent
  double p_critical;   // 1 + 4/(d-2), energy-critical exponent (excluded)
};

double conformal_exponent(int d);
double critical_exponent(int d);

// Unit sphere area in R^d, closed forms for d = 3..6.
double sphere_area(int d);

// Empty result means the parameters are admissible, otherwise a description
// of the first violated constraint.
std::optional<std::string> validate(const ModelParams& mp);

// Throws std::invalid_argument when validate() reports a violation.
DerivedConstants derive(const ModelParams& mp);

// sign(u)|u|^p, the odd power nonlinearity (0 at u = 0).
double power_nonlinearity(double u, double p);

}  // namespace rwave
