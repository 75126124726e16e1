#include "wormsim/stepper.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "wormsim/errors.hpp"

using namespace wormsim;

namespace {

PhysParams unit_params() {
  PhysParams p;
  p.alpha = 1.0;
  p.rho_s = 10.0;
  p.a0 = 1.0;
  p.k_c = 1.0;
  p.k_s0 = 1.0;
  p.E_g = 1.0;
  p.R_g = 1.0;
  p.T0 = 10.0;
  p.gamma = 1.0;
  p.mu = 1.0;
  p.set_isotropic_diffusivity(1e-2);
  p.rho_f = 1.0;
  p.theta_s = 1.0;
  p.theta_f = 10.0;
  p.lambda_s = 10.0;
  p.lambda_f = 1.0;
  return p;
}

SimState uniform_state(const StaggeredGrid& g, double p, double c, double t, double phi,
                       double k0 = 1.0) {
  SimState s(g);
  s.pressure.fill(p);
  s.concentration.fill(c);
  s.temperature.fill(t);
  s.porosity.fill(phi);
  s.initial_porosity.fill(phi);
  s.initial_permeability.fill(k0);
  return s;
}

double total(const CellField& f) {
  CellField ones(f.grid(), 1.0);
  return inner_M(f, ones);
}

}  // namespace

TEST_CASE("time control") {
  TimeControl tc = TimeControl::from_duration(1e4, 1e6);
  CHECK(tc.n_steps == 100);
  CHECK(tc.t_end() == doctest::Approx(1e6));
  CHECK_THROWS_AS(TimeControl::from_duration(0.3, 1.0), ConfigError);
  CHECK_THROWS_AS(TimeControl::from_duration(-0.1, 1.0), ConfigError);
  CHECK_THROWS_AS((TimeControl{0.0, 5}.validate()), ConfigError);
}

TEST_CASE("stepper rejects broken options") {
  StepperOptions bad_clamp;
  bad_clamp.clamp_cmax = 0.0;
  CHECK_THROWS_AS(Stepper(unit_params(), {}, {}, bad_clamp), ConfigError);
  StepperOptions bad_cap;
  bad_cap.perm_phi_cap = 1.0;
  CHECK_THROWS_AS(Stepper(unit_params(), {}, {}, bad_cap), ConfigError);
}

TEST_CASE("no acid, uniform fields: one step is the identity") {
  StaggeredGrid g = StaggeredGrid::square(8);
  SimState s = uniform_state(g, 2.5, 0.0, 10.0, 0.25);
  Stepper st(unit_params(), {}, {});
  st.advance(s, 0.01);
  CHECK(s.step == 1);
  for (std::int64_t k = 0; k < s.porosity.size(); ++k) {
    CHECK(s.porosity[k] == 0.25);
    CHECK(s.concentration[k] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(s.pressure[k] == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(s.temperature[k] == doctest::Approx(10.0).epsilon(1e-12));
  }
  CHECK(s.velocity.max_abs_boundary() == 0.0);
  CHECK(norm_TM(s.velocity) <= 1e-12);
}

TEST_CASE("porosity recast arithmetic") {
  // Parameters tuned so beta works out to exactly 0.5: scale = 1/10, r_T at
  // the reference temperature = 1 - 1/(1+1) = 1/2, cbar = 1, dt = 8,
  // 1 - phi0 = 0.8.
  StaggeredGrid g = StaggeredGrid::square(2);
  PhysParams p = unit_params();
  p.rho_s = 1.0;
  SimState s = uniform_state(g, 0.0, 1.0, 10.0, 0.2);
  Stepper st(p, {}, {});
  CellField psi = st.porosity_step(s, 0.8);
  for (std::int64_t k = 0; k < psi.size(); ++k)
    CHECK(psi[k] == doctest::Approx(0.7 / 1.5).epsilon(1e-15));
}

TEST_CASE("porosity update stays monotone, bounded, and under the rate limit") {
  StaggeredGrid g = StaggeredGrid::square(5);
  PhysParams p = unit_params();
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> phi0_d(0.05, 0.9), frac(0.0, 1.0);
  std::uniform_real_distribution<double> temp(0.5, 400.0), conc(-2.0, 5.0), step(1e-4, 2.0);
  Stepper st(p, {}, {});
  for (int rep = 0; rep < 1000; ++rep) {
    SimState s(g);
    s.pressure.fill(0.0);
    const double dt = step(rng);
    for (std::int64_t k = 0; k < s.porosity.size(); ++k) {
      const double f0 = phi0_d(rng);
      s.initial_porosity[k] = f0;
      s.porosity[k] = f0 + frac(rng) * (1.0 - f0) * 0.999;
      s.temperature[k] = temp(rng);
      s.concentration[k] = conc(rng);
      s.initial_permeability[k] = 1.0;
    }
    CellField psi = st.porosity_step(s, dt);
    for (std::int64_t k = 0; k < psi.size(); ++k) {
      CHECK(psi[k] >= s.porosity[k]);
      CHECK(psi[k] < 1.0);
      const double rate = (psi[k] - s.porosity[k]) / dt;
      const double bound =
          p.alpha * p.k_c * p.a0 / (p.rho_s * (1.0 - s.initial_porosity[k]));
      CHECK(rate < bound);
    }
  }
}

TEST_CASE("porosity step rejects an invalid medium") {
  StaggeredGrid g = StaggeredGrid::square(2);
  SimState s = uniform_state(g, 0.0, 0.0, 10.0, 0.5);
  s.initial_porosity(1, 1) = 1.0;
  Stepper st(unit_params(), {}, {});
  CHECK_THROWS_AS(st.porosity_step(s, 0.1), InvariantError);
}

TEST_CASE("pressure stage balances injection against storage exactly") {
  StaggeredGrid g = StaggeredGrid::square(10);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  SimState s = uniform_state(g, 1.0, 0.5, 10.0, 0.25);
  for (std::int64_t k = 0; k < s.pressure.size(); ++k) {
    s.pressure[k] = uni(rng);
    s.concentration[k] = uni(rng);
    s.porosity[k] = 0.25 + 0.4 * uni(rng);
  }

  SourceSpec src;
  src.injection_rate = CellField(g);
  src.production_rate = CellField(g);
  for (std::int64_t k = 0; k < g.cell_count(); ++k) {
    src.injection_rate[k] = uni(rng);
    src.production_rate[k] = -uni(rng);
  }
  src.injected_conc = 1.0;

  StepperOptions opts;
  opts.pressure_solver.method = SolveMethod::DenseLU;
  Stepper st(unit_params(), src, {}, opts);

  const double dt = 0.05;
  CellField psi_new = st.porosity_step(s, dt);
  auto [p_new, u_new] = st.pressure_velocity_step(s, psi_new, dt);

  const double lhs = (total(p_new) - total(s.pressure)) / dt +
                     (total(psi_new) - total(s.porosity)) / dt;
  const double rhs = total(src.injection_rate) + total(src.production_rate);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  CHECK(u_new.max_abs_boundary() == 0.0);
}

TEST_CASE("frozen medium with no flow conserves solute and heat") {
  StaggeredGrid g = StaggeredGrid::square(10);
  PhysParams p = unit_params();
  p.a0 = 0.0;  // reaction off, so the porosity stays frozen
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0.1, 1.0);

  SimState s = uniform_state(g, 3.0, 0.0, 10.0, 0.3);
  for (std::int64_t k = 0; k < s.concentration.size(); ++k) {
    s.concentration[k] = uni(rng);
    s.temperature[k] = 5.0 + uni(rng);
    s.porosity[k] = 0.2 + 0.5 * uni(rng);
    s.initial_porosity[k] = s.porosity[k];
  }

  StepperOptions opts;
  opts.transport_solver.method = SolveMethod::DenseLU;
  opts.pressure_solver.method = SolveMethod::DenseLU;
  Stepper st(p, {}, {}, opts);

  CellField sigma(g);
  for (std::int64_t k = 0; k < sigma.size(); ++k)
    sigma[k] = volumetric_heat_capacity(s.porosity[k], p);
  CellField psi_c0 = s.porosity;  // copies for the weighted totals
  double solute0 = 0.0, heat0 = 0.0;
  for (std::int64_t k = 0; k < s.concentration.size(); ++k) {
    solute0 += s.porosity[k] * s.concentration[k];
    heat0 += sigma[k] * s.temperature[k];
  }

  for (int n = 0; n < 50; ++n) st.advance(s, 0.02);

  double solute1 = 0.0, heat1 = 0.0;
  for (std::int64_t k = 0; k < s.concentration.size(); ++k) {
    solute1 += s.porosity[k] * s.concentration[k];
    heat1 += sigma[k] * s.temperature[k];
  }
  CHECK(solute1 == doctest::Approx(solute0).epsilon(1e-10));
  CHECK(heat1 == doctest::Approx(heat0).epsilon(1e-10));
  CHECK(norm_M(s.porosity) == doctest::Approx(norm_M(psi_c0)).epsilon(1e-15));
}

TEST_CASE("one full step satisfies every discrete equation cellwise") {
  // Independent oracle: rebuild each stage equation directly from the fields
  // the step produced and check the residuals vanish. Exercises the porosity
  // recast, both flux reconstructions, the face interpolations, and all four
  // right-hand sides, without reusing the assembly code paths.
  StaggeredGrid g = StaggeredGrid::square(4);
  PhysParams p = unit_params();
  const double dt = 1.0 / 16.0;

  SimState s(g);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) {
      const double x = g.center(Axis::X, i), y = g.center(Axis::Y, j);
      s.pressure(i, j) = 1.0 + 0.3 * x * y;
      s.concentration(i, j) = 0.6 + 0.2 * x - 0.1 * y;
      s.temperature(i, j) = 10.0 + std::sin(x + y);
      s.initial_porosity(i, j) = 0.25 + 0.05 * x;
      s.porosity(i, j) = s.initial_porosity(i, j);
      s.initial_permeability(i, j) = 1.0 + 0.5 * y;
    }

  SourceSpec src;
  src.pressure_source = [](double x, double y, double, double t) {
    return std::sin(x + 2.0 * y + t);
  };
  src.concentration_source = [](double x, double y, double, double t) {
    return std::cos(x - y) * (1.0 + t);
  };
  src.porosity_source = [](double x, double y, double, double t) {
    return 0.1 * std::cos(x * y + t);
  };
  src.temperature_source = [](double x, double y, double, double t) {
    return 2.0 + std::sin(3.0 * x) * std::cos(y) * t;
  };

  StepperOptions opts;
  opts.check_invariants = false;  // the porosity source is not monotone
  opts.pressure_solver.method = SolveMethod::DenseLU;
  opts.transport_solver.method = SolveMethod::DenseLU;
  Stepper st(p, src, {}, opts);

  SimState s0 = s;
  st.advance(s, dt);
  const double t1 = dt;
  const double h = g.spacing(Axis::X);

  auto mean2 = [](double a, double b) { return 0.5 * (a + b); };

  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) {
      const double x = g.center(Axis::X, i), y = g.center(Axis::Y, j);

      // porosity recast plus source
      const double r = reaction_factor(s0.temperature(i, j), p);
      const double cbar = clamp_conc(s0.concentration(i, j), opts.clamp_cmax);
      const double beta = (p.alpha * p.k_c * p.a0 / p.rho_s) * r * cbar * dt /
                          (1.0 - s0.initial_porosity(i, j));
      const double psi_want = (beta + s0.porosity(i, j)) / (1.0 + beta) +
                              dt * src.porosity_source(x, y, 0.0, t1);
      CHECK(s.porosity(i, j) == doctest::Approx(psi_want).epsilon(1e-14));

      // velocity matches its defining formula on interior faces
      if (i > 0) {
        const double psi_face = mean2(s.porosity(i - 1, j), s.porosity(i, j));
        const double phi0_face = mean2(s0.initial_porosity(i - 1, j), s0.initial_porosity(i, j));
        const double k0_face =
            mean2(s0.initial_permeability(i - 1, j), s0.initial_permeability(i, j));
        const double kap = permeability(psi_face, phi0_face, k0_face) / p.mu;
        const double want = -kap * (s.pressure(i, j) - s.pressure(i - 1, j)) / h;
        CHECK(s.velocity.at(Axis::X, i, j) == doctest::Approx(want).epsilon(1e-12));
      }

      // mass balance: gamma d_t P + d_t Psi + div U = f
      const double divU = (s.velocity.at(Axis::X, i + 1, j) - s.velocity.at(Axis::X, i, j)) / h +
                          (s.velocity.at(Axis::Y, i, j + 1) - s.velocity.at(Axis::Y, i, j)) / h;
      const double res_p = p.gamma * (s.pressure(i, j) - s0.pressure(i, j)) / dt +
                           (s.porosity(i, j) - s0.porosity(i, j)) / dt + divU -
                           src.pressure_source(x, y, 0.0, t1);
      CHECK(res_p == doctest::Approx(0.0).epsilon(1e-10));

      // solute balance: d_t(Psi C) + div W = reaction + g
      const double divW =
          (s.solute_flux.at(Axis::X, i + 1, j) - s.solute_flux.at(Axis::X, i, j)) / h +
          (s.solute_flux.at(Axis::Y, i, j + 1) - s.solute_flux.at(Axis::Y, i, j)) / h;
      const double av = interfacial_area(s.porosity(i, j), s0.initial_porosity(i, j), p.a0);
      const double res_c =
          (s.porosity(i, j) * s.concentration(i, j) - s0.porosity(i, j) * s0.concentration(i, j)) /
              dt +
          divW + p.k_c * av * reaction_factor(s0.temperature(i, j), p) * s.concentration(i, j) -
          src.concentration_source(x, y, 0.0, t1);
      CHECK(res_c == doctest::Approx(0.0).epsilon(1e-10));

      // heat balance: d_t(sigma Z) + div V = a_v H_r R + q
      const double divV =
          (s.heat_flux.at(Axis::X, i + 1, j) - s.heat_flux.at(Axis::X, i, j)) / h +
          (s.heat_flux.at(Axis::Y, i, j + 1) - s.heat_flux.at(Axis::Y, i, j)) / h;
      const double sig_new = volumetric_heat_capacity(s.porosity(i, j), p);
      const double sig_old = volumetric_heat_capacity(s0.porosity(i, j), p);
      const double heat_src = av * reaction_heat(s0.temperature(i, j)) *
                              reaction_rate(clamp_conc(s.concentration(i, j), opts.clamp_cmax),
                                            s0.temperature(i, j), p);
      const double res_z =
          (sig_new * s.temperature(i, j) - sig_old * s0.temperature(i, j)) / dt + divV -
          heat_src - src.temperature_source(x, y, 0.0, t1);
      CHECK(res_z == doctest::Approx(0.0).epsilon(1e-9));
    }

  // solute flux matches its defining formula on an interior face
  const double w_want = s.velocity.at(Axis::X, 2, 1) *
                            mean2(s.concentration(1, 1), s.concentration(2, 1)) -
                        mean2(s.porosity(1, 1), s.porosity(2, 1)) * p.diffusivity[0] *
                            (s.concentration(2, 1) - s.concentration(1, 1)) / h;
  CHECK(s.solute_flux.at(Axis::X, 2, 1) == doctest::Approx(w_want).epsilon(1e-12));
}

TEST_CASE("one full 3-D step satisfies every discrete equation cellwise") {
  // Same oracle as the 2-D case, on a cube: the z bands of every assembled
  // system and the z components of every reconstructed flux take part.
  StaggeredGrid g = StaggeredGrid::cube(4);
  PhysParams p = unit_params();
  const double dt = 1.0 / 16.0;

  SimState s(g);
  for (int l = 0; l < 4; ++l)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) {
        const double x = g.center(Axis::X, i);
        const double y = g.center(Axis::Y, j);
        const double z = g.center(Axis::Z, l);
        s.pressure(i, j, l) = 1.0 + 0.3 * x * y - 0.2 * z * x;
        s.concentration(i, j, l) = 0.6 + 0.2 * x - 0.1 * y + 0.15 * z;
        s.temperature(i, j, l) = 10.0 + std::sin(x + y - z);
        s.initial_porosity(i, j, l) = 0.25 + 0.05 * x + 0.03 * z;
        s.porosity(i, j, l) = s.initial_porosity(i, j, l);
        s.initial_permeability(i, j, l) = 1.0 + 0.5 * y + 0.25 * z;
      }

  SourceSpec src;
  src.pressure_source = [](double x, double y, double z, double t) {
    return std::sin(x + 2.0 * y - z + t);
  };
  src.concentration_source = [](double x, double y, double z, double t) {
    return std::cos(x - y + 0.5 * z) * (1.0 + t);
  };
  src.porosity_source = [](double x, double y, double z, double t) {
    return 0.1 * std::cos(x * y + z + t);
  };
  src.temperature_source = [](double x, double y, double z, double t) {
    return 2.0 + std::sin(3.0 * x - z) * std::cos(y) * t;
  };

  StepperOptions opts;
  opts.check_invariants = false;
  opts.pressure_solver.method = SolveMethod::DenseLU;
  opts.transport_solver.method = SolveMethod::DenseLU;
  Stepper st(p, src, {}, opts);

  SimState s0 = s;
  st.advance(s, dt);
  const double t1 = dt;
  const double h = g.spacing(Axis::X);

  auto mean2 = [](double a, double b) { return 0.5 * (a + b); };

  for (int l = 0; l < 4; ++l)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) {
        const double x = g.center(Axis::X, i);
        const double y = g.center(Axis::Y, j);
        const double z = g.center(Axis::Z, l);
        CAPTURE(i);
        CAPTURE(j);
        CAPTURE(l);

        const double r = reaction_factor(s0.temperature(i, j, l), p);
        const double cbar = clamp_conc(s0.concentration(i, j, l), opts.clamp_cmax);
        const double beta = (p.alpha * p.k_c * p.a0 / p.rho_s) * r * cbar * dt /
                            (1.0 - s0.initial_porosity(i, j, l));
        const double psi_want = (beta + s0.porosity(i, j, l)) / (1.0 + beta) +
                                dt * src.porosity_source(x, y, z, t1);
        CHECK(s.porosity(i, j, l) == doctest::Approx(psi_want).epsilon(1e-14));

        // velocity matches its defining formula on an interior z face
        if (l > 0) {
          const double psi_face = mean2(s.porosity(i, j, l - 1), s.porosity(i, j, l));
          const double phi0_face =
              mean2(s0.initial_porosity(i, j, l - 1), s0.initial_porosity(i, j, l));
          const double k0_face =
              mean2(s0.initial_permeability(i, j, l - 1), s0.initial_permeability(i, j, l));
          const double kap = permeability(psi_face, phi0_face, k0_face) / p.mu;
          const double want = -kap * (s.pressure(i, j, l) - s.pressure(i, j, l - 1)) / h;
          CHECK(s.velocity.at(Axis::Z, i, j, l) == doctest::Approx(want).epsilon(1e-12));
        }

        const double divU =
            (s.velocity.at(Axis::X, i + 1, j, l) - s.velocity.at(Axis::X, i, j, l)) / h +
            (s.velocity.at(Axis::Y, i, j + 1, l) - s.velocity.at(Axis::Y, i, j, l)) / h +
            (s.velocity.at(Axis::Z, i, j, l + 1) - s.velocity.at(Axis::Z, i, j, l)) / h;
        const double res_p = p.gamma * (s.pressure(i, j, l) - s0.pressure(i, j, l)) / dt +
                             (s.porosity(i, j, l) - s0.porosity(i, j, l)) / dt + divU -
                             src.pressure_source(x, y, z, t1);
        CHECK(res_p == doctest::Approx(0.0).epsilon(1e-10));

        const double divW =
            (s.solute_flux.at(Axis::X, i + 1, j, l) - s.solute_flux.at(Axis::X, i, j, l)) / h +
            (s.solute_flux.at(Axis::Y, i, j + 1, l) - s.solute_flux.at(Axis::Y, i, j, l)) / h +
            (s.solute_flux.at(Axis::Z, i, j, l + 1) - s.solute_flux.at(Axis::Z, i, j, l)) / h;
        const double av = interfacial_area(s.porosity(i, j, l), s0.initial_porosity(i, j, l), p.a0);
        const double res_c = (s.porosity(i, j, l) * s.concentration(i, j, l) -
                              s0.porosity(i, j, l) * s0.concentration(i, j, l)) /
                                 dt +
                             divW +
                             p.k_c * av * reaction_factor(s0.temperature(i, j, l), p) *
                                 s.concentration(i, j, l) -
                             src.concentration_source(x, y, z, t1);
        CHECK(res_c == doctest::Approx(0.0).epsilon(1e-10));

        const double divV =
            (s.heat_flux.at(Axis::X, i + 1, j, l) - s.heat_flux.at(Axis::X, i, j, l)) / h +
            (s.heat_flux.at(Axis::Y, i, j + 1, l) - s.heat_flux.at(Axis::Y, i, j, l)) / h +
            (s.heat_flux.at(Axis::Z, i, j, l + 1) - s.heat_flux.at(Axis::Z, i, j, l)) / h;
        const double sig_new = volumetric_heat_capacity(s.porosity(i, j, l), p);
        const double sig_old = volumetric_heat_capacity(s0.porosity(i, j, l), p);
        const double heat_src =
            av * reaction_heat(s0.temperature(i, j, l)) *
            reaction_rate(clamp_conc(s.concentration(i, j, l), opts.clamp_cmax),
                          s0.temperature(i, j, l), p);
        const double res_z =
            (sig_new * s.temperature(i, j, l) - sig_old * s0.temperature(i, j, l)) / dt + divV -
            heat_src - src.temperature_source(x, y, z, t1);
        CHECK(res_z == doctest::Approx(0.0).epsilon(1e-9));
      }

  // z-axis solute and heat flux definitions on an interior face
  const double wz_want = s.velocity.at(Axis::Z, 1, 2, 2) *
                             mean2(s.concentration(1, 2, 1), s.concentration(1, 2, 2)) -
                         mean2(s.porosity(1, 2, 1), s.porosity(1, 2, 2)) * p.diffusivity[2] *
                             (s.concentration(1, 2, 2) - s.concentration(1, 2, 1)) / h;
  CHECK(s.solute_flux.at(Axis::Z, 1, 2, 2) == doctest::Approx(wz_want).epsilon(1e-12));
  const double psi_face = mean2(s.porosity(1, 2, 1), s.porosity(1, 2, 2));
  const double vz_want = p.rho_f * p.theta_f * s.velocity.at(Axis::Z, 1, 2, 2) *
                             mean2(s.temperature(1, 2, 1), s.temperature(1, 2, 2)) -
                         thermal_conductivity(psi_face, p) *
                             (s.temperature(1, 2, 2) - s.temperature(1, 2, 1)) / h;
  CHECK(s.heat_flux.at(Axis::Z, 1, 2, 2) == doctest::Approx(vz_want).epsilon(1e-12));
}

TEST_CASE("strong convection trips the dominance check; monitor lets it run") {
  StaggeredGrid g = StaggeredGrid::square(5);
  PhysParams p = unit_params();
  p.set_isotropic_diffusivity(1e-6);
  SimState s = uniform_state(g, 0.0, 0.5, 10.0, 0.4);
  FaceField u(g, 0.0);
  for (int a = 0; a < 2; ++a) {
    auto comp = u.component(static_cast<Axis>(a));
    for (auto& v : comp) v = 1.0;
  }

  Stepper strict(p, {}, {});
  CellField psi = strict.porosity_step(s, 1.0);
  CHECK_THROWS_AS(strict.concentration_step(s, psi, u, 1.0), InvariantError);

  StepperOptions opts;
  opts.dominance = DominancePolicy::Monitor;
  Stepper loose(p, {}, {}, opts);
  auto [c_new, w_new] = loose.concentration_step(s, psi, u, 1.0);
  CHECK(loose.diagnostics().concentration_dominance.violations > 0);
  CHECK(c_new.all_finite());
}

TEST_CASE("fixed-temperature walls drive the discrete linear steady profile") {
  StaggeredGrid g(2, {16, 3, 0}, {0.0, 0.0, 0.0}, {1.0, 1.0, 0.0});
  PhysParams p = unit_params();
  p.rho_s = p.rho_f = p.theta_s = p.theta_f = 1.0;
  p.lambda_s = p.lambda_f = 1.0;
  p.a0 = 0.0;

  SimState s = uniform_state(g, 0.0, 0.0, 299.0, 0.5);
  BoundarySpec bc;
  bc.side(Side::XLo) = {true, 298.0};
  bc.side(Side::XHi) = {true, 300.0};

  StepperOptions opts;
  opts.transport_solver.tol = 1e-12;
  Stepper st(p, {}, bc, opts);
  for (int n = 0; n < 80; ++n) st.advance(s, 0.05);

  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 16; ++i) {
      const double want = 298.0 + 2.0 * g.center(Axis::X, i);
      CHECK(s.temperature(i, j) == doctest::Approx(want).epsilon(1e-8));
    }
  // conductive flux through the fixed walls is the profile slope
  CHECK(s.heat_flux.at(Axis::X, 0, 1) == doctest::Approx(-2.0).epsilon(1e-7));
  CHECK(s.heat_flux.at(Axis::X, 16, 1) == doctest::Approx(-2.0).epsilon(1e-7));
}

TEST_CASE("short physical run: injected acid dissolves rock monotonically") {
  StaggeredGrid g = StaggeredGrid::square(8);
  PhysParams p = unit_params();
  SimState s = uniform_state(g, 1.0, 0.0, 10.0, 0.25);

  SourceSpec src;
  src.injection_rate = CellField(g);
  src.production_rate = CellField(g);
  for (int j = 0; j < 8; ++j) {
    src.injection_rate(0, j) = 1.0;
    src.production_rate(7, j) = -1.0;
  }
  src.injected_conc = 1.0;

  Stepper st(p, src, {});
  const double avg0 = total(s.porosity);
  for (int n = 0; n < 10; ++n) {
    CellField before = s.porosity;
    st.advance(s, 0.01);
    for (std::int64_t k = 0; k < before.size(); ++k) CHECK(s.porosity[k] >= before[k]);
  }
  CHECK(total(s.porosity) > avg0);
  CHECK(s.velocity.max_abs_boundary() == 0.0);
  CHECK(s.solute_flux.max_abs_boundary() == 0.0);
  CHECK(s.heat_flux.max_abs_boundary() == 0.0);
  CHECK(s.concentration.all_finite());
  CHECK(s.temperature.all_finite());
}
