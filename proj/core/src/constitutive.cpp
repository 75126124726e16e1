#include "wormsim/constitutive.hpp"

#include <cmath>
#include <string>

#include "wormsim/errors.hpp"

namespace wormsim {

void PhysParams::validate() const {
  auto need_positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string("PhysParams: ") + name + " must be positive, got " +
                        std::to_string(v));
  };
  need_positive(alpha, "alpha");
  need_positive(rho_s, "rho_s");
  if (!(a0 >= 0.0) || !std::isfinite(a0))
    throw ConfigError("PhysParams: a0 must be nonnegative, got " + std::to_string(a0));
  need_positive(k_c, "k_c");
  need_positive(k_s0, "k_s0");
  need_positive(E_g, "E_g");
  need_positive(R_g, "R_g");
  need_positive(T0, "T0");
  need_positive(gamma, "gamma");
  need_positive(mu, "mu");
  for (double d : diffusivity) need_positive(d, "diffusivity");
  need_positive(rho_f, "rho_f");
  need_positive(theta_s, "theta_s");
  need_positive(theta_f, "theta_f");
  need_positive(lambda_s, "lambda_s");
  need_positive(lambda_f, "lambda_f");
}

double permeability(double phi, double phi0, double K0, double phi_cap, PermClipStats* stats) {
  constexpr double kPhiFloor = 1e-9;
  if (phi < kPhiFloor) {
    phi = kPhiFloor;
    if (stats) ++stats->low;
  } else if (phi > phi_cap) {
    phi = phi_cap;
    if (stats) ++stats->high;
  }
  const double mobility = phi / phi0;
  const double ratio = phi * (1.0 - phi0) / (phi0 * (1.0 - phi));
  return K0 * mobility * ratio * ratio;
}

double interfacial_area(double phi, double phi0, double a0, double K, double K0) {
  return a0 * (phi / phi0) * std::sqrt(K0 * phi / (K * phi0));
}

double interfacial_area(double phi, double phi0, double a0) {
  return a0 * (1.0 - phi) / (1.0 - phi0);
}

double surface_rate(double T, const PhysParams& p) {
  if (!(T > 0.0))
    throw InvariantError("surface_rate: nonpositive absolute temperature " + std::to_string(T));
  return p.k_s0 * std::exp(p.E_g / p.R_g * (1.0 / p.T0 - 1.0 / T));
}

double reaction_heat(double T) {
  return std::abs(-9702.0 + 16.97 * T - 0.00234 * T * T);
}

double interface_conc(double c, double k_s, double k_c) {
  return c / (1.0 + k_s / k_c);
}

double reaction_factor(double T, const PhysParams& p) {
  return 1.0 - 1.0 / (1.0 + surface_rate(T, p) / p.k_c);
}

double reaction_rate(double c, double T, const PhysParams& p) {
  return p.k_c * reaction_factor(T, p) * c;
}

double thermal_conductivity(double phi, const PhysParams& p) {
  return (1.0 - phi) * p.lambda_s + phi * p.lambda_f;
}

double volumetric_heat_capacity(double phi, const PhysParams& p) {
  return p.rho_s * (1.0 - phi) * p.theta_s + p.rho_f * phi * p.theta_f;
}

double clamp_conc(double c, double c_max) {
  if (c < 0.0) return 0.0;
  if (c > c_max) return c_max;
  return c;
}

}  // namespace wormsim
