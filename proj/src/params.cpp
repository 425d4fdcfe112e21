#include "rwave/params.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rwave {

double conformal_exponent(int d) { return 1.0 + 4.0 / (d - 1); }

double critical_exponent(int d) { return 1.0 + 4.0 / (d - 2); }

double sphere_area(int d) {
  constexpr double pi = std::numbers::pi;
  switch (d) {
    case 3: return 4.0 * pi;
    case 4: return 2.0 * pi * pi;
    case 5: return 8.0 * pi * pi / 3.0;
    case 6: return pi * pi * pi;
    default: throw std::invalid_argument("sphere_area: d must be in {3,4,5,6}");
  }
}

std::optional<std::string> validate(const ModelParams& mp) {
  if (mp.d < 3 || mp.d > 6)
    return "d must be one of {3,4,5,6}, got " + std::to_string(mp.d);
  if (mp.zeta != -1 && mp.zeta != 0)
    return "zeta must be -1 (defocusing) or 0 (linear), got " + std::to_string(mp.zeta);
  const double pc = conformal_exponent(mp.d);
  const double pe = critical_exponent(mp.d);
  if (!(mp.p >= pc) || !(mp.p < pe))
    return "p must satisfy " + std::to_string(pc) + " <= p < " + std::to_string(pe) +
           " in d = " + std::to_string(mp.d) + ", got " + std::to_string(mp.p);
  return std::nullopt;
}

DerivedConstants derive(const ModelParams& mp) {
  if (auto err = validate(mp)) throw std::invalid_argument("derive: " + *err);
  DerivedConstants k;
  k.lambda = (mp.d - 1) * (mp.d - 3) / 4.0;
  k.beta = ((mp.d - 1) * (mp.p - 1) - 2.0) / (2.0 * (mp.p + 1.0));
  k.kappa0 = (4.0 - (mp.d - 2) * (mp.p - 1.0)) / (mp.p + 1.0);
  k.s_p = mp.d / 2.0 - 2.0 / (mp.p - 1.0);
  k.c_d = sphere_area(mp.d);
  k.p_conformal = conformal_exponent(mp.d);
  k.p_critical = critical_exponent(mp.d);
  return k;
}

double power_nonlinearity(double u, double p) {
  if (u == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(u), p), u);
}

}  // namespace rwave
