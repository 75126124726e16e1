#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <utility>

#include "wormsim/banded.hpp"
#include "wormsim/constitutive.hpp"
#include "wormsim/grid.hpp"

namespace wormsim {

struct TimeControl {
  double dt = 0.0;
  std::int64_t n_steps = 0;

  double t_end() const { return dt * static_cast<double>(n_steps); }

  // Splits a run duration into steps; throws ConfigError unless the duration
  // is an integral multiple of dt.
  static TimeControl from_duration(double dt, double duration);
  void validate() const;

  bool operator==(const TimeControl&) const = default;
};

enum class Side : int { XLo = 0, XHi = 1, YLo = 2, YHi = 3, ZLo = 4, ZHi = 5 };

struct SideCondition {
  bool fixed = false;  // false: no-flux
  double value = 0.0;  // boundary value when fixed

  bool operator==(const SideCondition&) const = default;
};

// Flow and solute flux see impermeable walls everywhere; only the temperature
// admits per-side fixed values (held at 298 K on the inflow side in the
// cooled-injection scenario).
struct BoundarySpec {
  std::array<SideCondition, 6> temperature{};

  SideCondition& side(Side s) { return temperature[static_cast<int>(s)]; }
  const SideCondition& side(Side s) const { return temperature[static_cast<int>(s)]; }

  bool operator==(const BoundarySpec&) const = default;
};

// Pointwise source callback (x, y, z, t) -> value; z is passed as 0 in 2-D.
using SourceFn = std::function<double(double, double, double, double)>;

struct SourceSpec {
  CellField injection_rate;    // empty means zero everywhere
  CellField production_rate;   // nonpositive where present
  double injected_conc = 0.0;  // concentration carried by the injected fluid

  // Manufactured-solution hooks, one per equation; evaluated at cell centers
  // at the new time level. Leave empty for physical runs.
  SourceFn pressure_source;
  SourceFn concentration_source;
  SourceFn porosity_source;
  SourceFn temperature_source;
};

struct StepperOptions {
  // Upper clamp on the concentration feeding the dissolution reaction.
  double clamp_cmax = 1.0;
  // Porosity cap inside the permeability law; scenario presets lower it to
  // keep the permeability contrast inside what the linear solver can resolve.
  double perm_phi_cap = 1.0 - 1e-9;
  SolverOptions pressure_solver{};
  SolverOptions transport_solver{};
  DominancePolicy dominance = DominancePolicy::Strict;
  // Porosity bound and monotonicity assertions; switch off for manufactured
  // runs whose porosity source breaks monotonicity by design.
  bool check_invariants = true;
};

struct SimState {
  explicit SimState(const StaggeredGrid& g);

  StaggeredGrid grid;
  std::int64_t step = 0;
  double time = 0.0;

  CellField pressure;
  CellField concentration;
  CellField temperature;
  CellField porosity;

  // Medium data, fixed over the run.
  CellField initial_porosity;
  CellField initial_permeability;

  // Fluxes reconstructed at the end of the last completed step.
  FaceField velocity;     // Darcy velocity
  FaceField solute_flux;  // advective plus diffusive acid flux
  FaceField heat_flux;    // advective plus conductive heat flux
};

struct StepDiagnostics {
  SolveReport pressure;
  SolveReport concentration;
  SolveReport temperature;
  PermClipStats perm_clips;
  DominanceReport concentration_dominance;
  DominanceReport temperature_dominance;
  double max_porosity_rate = 0.0;
};

// One backward-Euler time step, fully decoupled: porosity first (explicit
// recast update), then pressure/velocity, then concentration, then
// temperature. Each linear stage consumes only already-computed fields, so
// every solve is a single strictly banded system and no stage iterates.
class Stepper {
 public:
  Stepper(PhysParams params, SourceSpec sources, BoundarySpec bc, StepperOptions opts = {});

  const PhysParams& params() const { return params_; }
  const StepperOptions& options() const { return opts_; }
  const BoundarySpec& boundary() const { return bc_; }
  const StepDiagnostics& diagnostics() const { return diag_; }

  // Stage (i). Recast update Psi = (beta + Psi_old)/(1 + beta) with
  // beta = (alpha k_c a0 / rho_s) r_T(Z_old) clamp(C_old) dt / (1 - phi0),
  // which keeps Psi_old <= Psi < 1 without any step-size restriction. The
  // manufactured source, when present, is added after the update.
  CellField porosity_step(const SimState& s, double dt);

  // Stage (ii). Solves the pressure system with face mobility
  // K(interp phi; interp phi0, interp K0)/mu, then reconstructs the velocity
  // on interior faces (walls are no-flow).
  std::pair<CellField, FaceField> pressure_velocity_step(const SimState& s,
                                                         const CellField& psi_new, double dt);

  // Stage (iii). Centered convection, porosity-weighted diffusion, and the
  // temperature-lagged reaction sink; returns the concentration and the
  // reconstructed solute flux.
  std::pair<CellField, FaceField> concentration_step(const SimState& s, const CellField& psi_new,
                                                     const FaceField& u_new, double dt);

  // Stage (iv). Heat capacity weighted mass term, conduction with
  // porosity-mixed conductivity, convection by the new velocity, and the
  // lagged reaction heat. Fixed-temperature sides enter through ghost
  // reflection across the wall.
  std::pair<CellField, FaceField> temperature_step(const SimState& s, const CellField& psi_new,
                                                   const FaceField& u_new,
                                                   const CellField& conc_new, double dt);

  // Runs stages (i)-(iv) and commits the result into s.
  void advance(SimState& s, double dt);

 private:
  void require_medium(const SimState& s) const;

  PhysParams params_;
  SourceSpec sources_;
  BoundarySpec bc_;
  StepperOptions opts_;
  StepDiagnostics diag_;
};

}  // namespace wormsim
