#include "wormsim/constitutive.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "wormsim/errors.hpp"

using namespace wormsim;

namespace {

PhysParams carbonate_params() {
  PhysParams p;
  p.alpha = 5e-2;
  p.rho_s = 2.71e3;
  p.a0 = 0.5;
  p.k_c = 1e-3;
  p.k_s0 = 2e-3;
  p.E_g = 5.02416e4;
  p.R_g = 8.314;
  p.T0 = 298.0;
  p.gamma = 1.0;
  p.mu = 1e-3;
  p.set_isotropic_diffusivity(1e-9);
  p.rho_f = 1.01e3;
  p.theta_s = 2.0e2;
  p.theta_f = 4.184e3;
  p.lambda_s = 5.526;
  p.lambda_f = 0.58;
  return p;
}

}  // namespace

TEST_CASE("permeability: reference point, identity at phi0, monotone") {
  CHECK(permeability(0.5, 0.2, 1e-8) == doctest::Approx(4.0e-7).epsilon(1e-12));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.05, 0.95);
  for (int i = 0; i < 1000; ++i) {
    const double phi0 = dist(rng);
    CHECK(permeability(phi0, phi0, 3.7e-9) == doctest::Approx(3.7e-9).epsilon(1e-13));
    const double lo = dist(rng), hi = dist(rng);
    if (lo < hi)
      CHECK(permeability(lo, phi0, 1e-8) < permeability(hi, phi0, 1e-8));
    else if (hi < lo)
      CHECK(permeability(hi, phi0, 1e-8) < permeability(lo, phi0, 1e-8));
  }
}

TEST_CASE("permeability guard clips and counts") {
  PermClipStats stats;
  const double at_cap = permeability(1.0, 0.2, 1e-8, 1.0 - 1e-9, &stats);
  CHECK(stats.high == 1);
  CHECK(at_cap == permeability(1.0 - 1e-9, 0.2, 1e-8));
  CHECK(std::isfinite(at_cap));

  const double at_floor = permeability(-0.25, 0.2, 1e-8, 1.0 - 1e-9, &stats);
  CHECK(stats.low == 1);
  CHECK(at_floor == permeability(1e-9, 0.2, 1e-8));

  // A lowered cap bounds the channel/matrix contrast.
  const double capped = permeability(0.9999, 0.2, 1e-8, 0.95, &stats);
  CHECK(capped == permeability(0.95, 0.2, 1e-8));
  CHECK(stats.high == 2);
}

TEST_CASE("interfacial area: two routes agree") {
  CHECK(interfacial_area(0.5, 0.2, 0.5) == doctest::Approx(0.3125).epsilon(1e-13));

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> dist(0.05, 0.95);
  for (int i = 0; i < 10000; ++i) {
    const double phi = dist(rng);
    const double phi0 = dist(rng);
    const double K0 = 1e-8;
    const double K = permeability(phi, phi0, K0);
    const double via_model = interfacial_area(phi, phi0, 0.5, K, K0);
    const double closed = interfacial_area(phi, phi0, 0.5);
    CHECK(std::abs(via_model - closed) <= 1e-12 * std::max(1e-30, std::abs(closed)));
  }

  // At phi == phi0 both collapse to a0.
  CHECK(interfacial_area(0.37, 0.37, 0.81) == doctest::Approx(0.81).epsilon(1e-13));
}

TEST_CASE("surface rate: reference temperature and Arrhenius growth") {
  PhysParams p = carbonate_params();
  CHECK(surface_rate(p.T0, p) == doctest::Approx(p.k_s0).epsilon(1e-14));

  // Same law composed the other way round, in long double.
  const long double expo =
      static_cast<long double>(p.E_g) / p.R_g * (308.0L - 298.0L) / (308.0L * 298.0L);
  const double oracle = static_cast<double>(p.k_s0 * std::exp(expo));
  const double ks = surface_rate(308.0, p);
  CHECK(ks == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(ks == doctest::Approx(3.8634e-3).epsilon(1e-4));

  CHECK(surface_rate(310.0, p) > surface_rate(300.0, p));
  CHECK_THROWS_AS(surface_rate(0.0, p), InvariantError);
  CHECK_THROWS_AS(surface_rate(-4.0, p), InvariantError);
}

TEST_CASE("reaction heat at ambient temperature") {
  const double oracle = std::abs(-9702.0 + 16.97 * 298.0 - 0.00234 * 298.0 * 298.0);
  CHECK(reaction_heat(298.0) == doctest::Approx(oracle).epsilon(1e-15));
  CHECK(reaction_heat(298.0) == doctest::Approx(4852.74136).epsilon(1e-9));
  CHECK(reaction_heat(500.0) > 0.0);
}

TEST_CASE("interface concentration") {
  CHECK(interface_conc(2.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(0.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double c = dist(rng);
    const double cs = interface_conc(c, dist(rng) + 1e-6, 1e-3);
    CHECK(cs >= 0.0);
    CHECK(cs <= c);
  }
}

TEST_CASE("reaction rate: factored form equals interface-deficit form") {
  PhysParams p = carbonate_params();
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> conc(0.0, 1.0);
  std::uniform_real_distribution<double> temp(280.0, 400.0);
  for (int i = 0; i < 10000; ++i) {
    const double c = conc(rng);
    const double T = temp(rng);
    const double factored = reaction_rate(c, T, p);
    const double ks = surface_rate(T, p);
    const double deficit = p.k_c * (c - interface_conc(c, ks, p.k_c));
    CHECK(std::abs(factored - deficit) <= 1e-13 * std::max(1.0, std::abs(deficit)));
    CHECK(factored >= 0.0);
    const double f = reaction_factor(T, p);
    CHECK(f > 0.0);
    CHECK(f < 1.0);
  }
}

TEST_CASE("mixture laws") {
  PhysParams p = carbonate_params();
  CHECK(thermal_conductivity(0.5, p) == doctest::Approx(3.053).epsilon(1e-12));
  CHECK(thermal_conductivity(0.0, p) == doctest::Approx(p.lambda_s));
  CHECK(thermal_conductivity(1.0, p) == doctest::Approx(p.lambda_f));

  CHECK(volumetric_heat_capacity(0.0, p) == doctest::Approx(p.rho_s * p.theta_s));
  CHECK(volumetric_heat_capacity(1.0, p) == doctest::Approx(p.rho_f * p.theta_f));

  // The verification parameter set has rho_s*theta_s == rho_f*theta_f, so
  // sigma is porosity-independent there.
  PhysParams v;
  v.rho_s = 10.0;
  v.theta_s = 1.0;
  v.rho_f = 1.0;
  v.theta_f = 10.0;
  CHECK(volumetric_heat_capacity(0.3, v) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(volumetric_heat_capacity(0.9, v) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("concentration clamp") {
  CHECK(clamp_conc(-1.0, 1.0) == 0.0);
  CHECK(clamp_conc(2.0, 1.0) == 1.0);
  CHECK(clamp_conc(0.5, 1.0) == 0.5);
  CHECK(clamp_conc(750.0, 1e3) == 750.0);
  CHECK(clamp_conc(2.0e3, 1e3) == 1e3);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(clamp_conc(7.5e9, inf) == 7.5e9);
  CHECK(clamp_conc(-7.5e9, inf) == 0.0);
}

TEST_CASE("parameter validation") {
  PhysParams p = carbonate_params();
  CHECK_NOTHROW(p.validate());
  p.a0 = 0.0;  // reaction switched off is admissible
  CHECK_NOTHROW(p.validate());
  p.mu = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = carbonate_params();
  p.diffusivity[1] = -1e-9;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
