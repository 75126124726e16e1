#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wormsim/constitutive.hpp"
#include "wormsim/grid.hpp"
#include "wormsim/stepper.hpp"

namespace wormsim::mms {

// Value and partial derivatives of one scalar field at a point. grad2 holds
// the per-axis second derivatives; mixed derivatives never enter the source
// terms, so they are not carried.
struct FieldDerivs {
  double v = 0.0;
  double dt = 0.0;
  std::array<double, 3> grad{0.0, 0.0, 0.0};
  std::array<double, 3> grad2{0.0, 0.0, 0.0};
};

// A closed-form solution of the coupled flow/transport/dissolution/heat
// system on the unit box, used to measure discretization errors. Concrete
// cases supply the four primitive fields with hand-derived partials; the
// base class composes the Darcy velocity and the source terms that make the
// fields solve the continuous equations exactly. The fields are built so
// that the normal velocity and the normal derivatives of concentration and
// temperature vanish on the boundary, matching the solver's wall conditions,
// and so that porosity at t = 0 is uniform.
class ManufacturedCase {
 public:
  virtual ~ManufacturedCase() = default;

  virtual int dim() const = 0;
  virtual const char* name() const = 0;
  virtual double initial_porosity() const = 0;
  double initial_permeability() const { return 1.0; }

  virtual FieldDerivs pressure(const std::array<double, 3>& x, double t) const = 0;
  virtual FieldDerivs concentration(const std::array<double, 3>& x, double t) const = 0;
  virtual FieldDerivs temperature(const std::array<double, 3>& x, double t) const = 0;
  virtual FieldDerivs porosity(const std::array<double, 3>& x, double t) const = 0;

  // Unit-scale physical constants shared by all verification cases.
  const PhysParams& params() const { return params_; }

  // -K(phi)/mu dp/dx_a and its divergence, composed from the closed forms.
  double velocity(Axis a, const std::array<double, 3>& x, double t) const;
  double velocity_divergence(const std::array<double, 3>& x, double t) const;

  double pressure_source(const std::array<double, 3>& x, double t) const;
  double concentration_source(const std::array<double, 3>& x, double t) const;
  double porosity_source(const std::array<double, 3>& x, double t) const;
  double temperature_source(const std::array<double, 3>& x, double t) const;

 protected:
  ManufacturedCase();

 private:
  PhysParams params_;
};

std::unique_ptr<ManufacturedCase> example1_case();  // 2-D, linear in time
std::unique_ptr<ManufacturedCase> example2_case();  // 3-D, exponential in time

// Mesh, initial fields and stepper wiring for a verification run with n
// cells per axis. The source spec keeps a pointer to the case, which must
// outlive the stepper built from it.
StaggeredGrid study_grid(const ManufacturedCase& c, int n);
SimState initial_state(const ManufacturedCase& c, const StaggeredGrid& g);
SourceSpec manufactured_sources(const ManufacturedCase& c);
StepperOptions manufactured_options();

// Running maxima over completed steps of the discrete solution's distance to
// the closed-form fields: scalars in the cell norm, velocity in the
// interior-face norm. The face-gradient errors of concentration and
// temperature are also accumulated as time-integrated squares; they are
// reported alongside the tracked maxima but carry no acceptance weight.
class ErrorTracker {
 public:
  ErrorTracker(const ManufacturedCase& c, const StaggeredGrid& g);

  void observe(const SimState& s);
  int observed_steps() const { return steps_; }

  // All getters throw std::invalid_argument until one step has been observed.
  double porosity_error() const;
  double pressure_error() const;
  double velocity_error() const;
  double concentration_error() const;
  double temperature_error() const;
  double concentration_gradient_error() const;
  double temperature_gradient_error() const;

 private:
  void require_history() const;

  const ManufacturedCase* case_ = nullptr;
  StaggeredGrid grid_;
  int steps_ = 0;
  double prev_time_ = 0.0;
  double e_phi_ = 0.0;
  double e_p_ = 0.0;
  double e_u_ = 0.0;
  double e_c_ = 0.0;
  double e_t_ = 0.0;
  double grad_c_sq_ = 0.0;
  double grad_t_sq_ = 0.0;
};

struct MeshResult {
  int cells = 0;
  double h = 0.0;
  double e_porosity = 0.0;
  double e_pressure = 0.0;
  double e_velocity = 0.0;
  double e_concentration = 0.0;
  double e_temperature = 0.0;
  double e_grad_concentration = 0.0;
  double e_grad_temperature = 0.0;

  // The five tracked errors in reporting order: phi, p, u, c, T.
  std::array<double, 5> tracked() const {
    return {e_porosity, e_pressure, e_velocity, e_concentration, e_temperature};
  }
};

struct ConvergenceReport {
  std::string case_name;
  std::vector<MeshResult> meshes;

  struct RateRow {
    int coarse = 0;
    int fine = 0;
    std::array<double, 5> rate{};  // same order as MeshResult::tracked()
  };

  // log2(e_coarse / e_fine) for consecutive meshes whose cell counts have
  // exact ratio 2; other adjacencies produce no row.
  std::vector<RateRow> rates() const;

  std::string csv() const;
  std::string table() const;
};

using MeshCallback = std::function<void(const MeshResult&)>;

// Runs one full simulation per mesh with dt = h^2 on the time interval
// [0, 1] and collects the tracked error norms. Meshes run in the order
// given; on_mesh, when set, fires after each one.
ConvergenceReport run_convergence_study(const ManufacturedCase& c, std::span<const int> meshes,
                                        const MeshCallback& on_mesh = {});

}  // namespace wormsim::mms
