#pragma once

#include <array>
#include <cstdint>

namespace wormsim {

// Fluid, rock and reaction constants shared by every closure and by the time
// stepper. Diffusivity is a diagonal tensor, one entry per axis.
struct PhysParams {
  double alpha = 0.0;     // grams of mineral dissolved per mole of acid
  double rho_s = 0.0;     // rock density
  double a0 = 0.0;        // interfacial area per volume at initial porosity
  double k_c = 0.0;       // mass-transfer coefficient
  double k_s0 = 0.0;      // surface reaction rate at the reference temperature
  double E_g = 0.0;       // activation energy
  double R_g = 0.0;       // gas constant
  double T0 = 0.0;        // reference temperature for the Arrhenius law
  double gamma = 0.0;     // weak compressibility
  double mu = 0.0;        // fluid viscosity
  std::array<double, 3> diffusivity{0.0, 0.0, 0.0};
  double rho_f = 0.0;     // fluid density
  double theta_s = 0.0;   // rock specific heat
  double theta_f = 0.0;   // fluid specific heat
  double lambda_s = 0.0;  // rock thermal conductivity
  double lambda_f = 0.0;  // fluid thermal conductivity

  void set_isotropic_diffusivity(double d) { diffusivity = {d, d, d}; }

  // Throws ConfigError naming the first nonpositive entry. The interfacial
  // area a0 may be zero (that switches the reaction off); everything else
  // must be strictly positive.
  void validate() const;

  bool operator==(const PhysParams&) const = default;
};

// Counts how often the porosity fed to the permeability law had to be pulled
// back into its admissible range.
struct PermClipStats {
  std::int64_t low = 0;
  std::int64_t high = 0;
};

// Kozeny-type permeability K0*(phi/phi0)*(phi(1-phi0)/(phi0(1-phi)))^2.
// The porosity argument is clipped to [1e-9, phi_cap] before evaluation to
// keep the (1-phi)^-2 singularity out of the arithmetic; phi_cap defaults to
// 1 - 1e-9 and dissolution scenarios lower it to bound the permeability
// contrast the pressure solve has to absorb.
double permeability(double phi, double phi0, double K0, double phi_cap = 1.0 - 1e-9,
                    PermClipStats* stats = nullptr);

// Interfacial area per volume. The first form follows the pore-scale model
// a0*(phi/phi0)*sqrt(K0*phi/(K*phi0)); the second is the closed form
// a0*(1-phi)/(1-phi0) obtained by substituting the permeability law. They
// agree to rounding and tests hold them against each other; the stepper uses
// the closed form because it stays exact when the permeability guard clips.
double interfacial_area(double phi, double phi0, double a0, double K, double K0);
double interfacial_area(double phi, double phi0, double a0);

// Arrhenius surface rate k_s0 * exp((E_g/R_g)(1/T0 - 1/T)).
// Throws InvariantError for a nonpositive absolute temperature.
double surface_rate(double T, const PhysParams& p);

// Dissolution enthalpy magnitude |-9702 + 16.97 T - 0.00234 T^2|.
double reaction_heat(double T);

// Acid concentration at the fluid-solid interface, c/(1 + k_s/k_c).
double interface_conc(double c, double k_s, double k_c);

// Fraction of bulk acid consumed at the interface: 1 - 1/(1 + k_s(T)/k_c).
// Always in (0,1); the factored reaction rate is k_c * this * c.
double reaction_factor(double T, const PhysParams& p);

// Reaction rate in factored form, k_c * reaction_factor * c. Algebraically
// equal to k_c*(c - interface_conc(c, k_s, k_c)).
double reaction_rate(double c, double T, const PhysParams& p);

// Porosity-weighted mixture laws.
double thermal_conductivity(double phi, const PhysParams& p);
double volumetric_heat_capacity(double phi, const PhysParams& p);  // sigma(phi)

// Pull a concentration into [0, c_max]. c_max may be +infinity.
double clamp_conc(double c, double c_max);

}  // namespace wormsim
