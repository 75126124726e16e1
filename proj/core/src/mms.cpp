#include "wormsim/mms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "wormsim/errors.hpp"

namespace wormsim::mms {

namespace {

constexpr double kPi = std::numbers::pi;

// Value and first two derivatives of the bump polynomials s^k (1-s)^k. The
// expanded first derivatives telescope to exactly zero at s = 0 and s = 1 in
// floating point, which is what makes the no-flow walls exact.
struct Poly {
  double v;
  double d1;
  double d2;
};

Poly quartic_bump(double s) {
  const double u = 1.0 - s;
  const double s2 = s * s;
  return {s2 * u * u,
          2.0 * s - 6.0 * s2 + 4.0 * s2 * s,
          2.0 - 12.0 * s + 12.0 * s2};
}

Poly sextic_bump(double s) {
  const double u = 1.0 - s;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double s4 = s2 * s2;
  return {s3 * u * u * u,
          3.0 * s2 - 12.0 * s3 + 15.0 * s4 - 6.0 * s4 * s,
          6.0 * s - 36.0 * s2 + 60.0 * s3 - 30.0 * s4};
}

Poly octic_bump(double s) {
  const double u = 1.0 - s;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double s4 = s2 * s2;
  const double u2 = u * u;
  return {s4 * u2 * u2,
          4.0 * s3 - 20.0 * s4 + 36.0 * s4 * s - 28.0 * s4 * s2 + 8.0 * s4 * s3,
          12.0 * s2 - 80.0 * s3 + 180.0 * s4 - 168.0 * s4 * s + 56.0 * s4 * s2};
}

PhysParams verification_params() {
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

class Example1 final : public ManufacturedCase {
 public:
  int dim() const override { return 2; }
  const char* name() const override { return "example1"; }
  double initial_porosity() const override { return 0.25; }

  FieldDerivs pressure(const std::array<double, 3>& x, double t) const override {
    const Poly X = quartic_bump(x[0]);
    const Poly Y = quartic_bump(x[1]);
    FieldDerivs f;
    f.v = t * X.v * Y.v + 1.0;
    f.dt = X.v * Y.v;
    f.grad = {t * X.d1 * Y.v, t * X.v * Y.d1, 0.0};
    f.grad2 = {t * X.d2 * Y.v, t * X.v * Y.d2, 0.0};
    return f;
  }

  FieldDerivs concentration(const std::array<double, 3>& x, double t) const override {
    const double cx = std::cos(kPi * x[0]);
    const double sx = std::sin(kPi * x[0]);
    const double cy = std::cos(kPi * x[1]);
    const double sy = std::sin(kPi * x[1]);
    FieldDerivs f;
    f.v = 1.0 + t * cx * cy;
    f.dt = cx * cy;
    f.grad = {-t * kPi * sx * cy, -t * kPi * cx * sy, 0.0};
    f.grad2 = {-t * kPi * kPi * cx * cy, -t * kPi * kPi * cx * cy, 0.0};
    return f;
  }

  FieldDerivs temperature(const std::array<double, 3>& x, double t) const override {
    FieldDerivs f = concentration(x, t);
    f.v = 0.5 * (f.v - 1.0) + 10.0;
    f.dt *= 0.5;
    for (int a = 0; a < 2; ++a) {
      f.grad[a] *= 0.5;
      f.grad2[a] *= 0.5;
    }
    return f;
  }

  FieldDerivs porosity(const std::array<double, 3>& x, double t) const override {
    const Poly X = quartic_bump(x[0]);
    const double sy = std::sin(kPi * x[1]);
    const double cy = std::cos(kPi * x[1]);
    FieldDerivs f;
    f.v = 0.25 * t * X.v * sy + 0.25;
    f.dt = 0.25 * X.v * sy;
    f.grad = {0.25 * t * X.d1 * sy, 0.25 * t * kPi * X.v * cy, 0.0};
    f.grad2 = {0.25 * t * X.d2 * sy, -0.25 * t * kPi * kPi * X.v * sy, 0.0};
    return f;
  }
};

class Example2 final : public ManufacturedCase {
 public:
  int dim() const override { return 3; }
  const char* name() const override { return "example2"; }
  double initial_porosity() const override { return 0.5; }

  FieldDerivs pressure(const std::array<double, 3>& x, double t) const override {
    const double e = std::expm1(t);
    const double de = std::exp(t);
    const Poly X = octic_bump(x[0]);
    const double cy = std::cos(kPi * x[1]);
    const double sy = std::sin(kPi * x[1]);
    const double cz = std::cos(kPi * x[2]);
    const double sz = std::sin(kPi * x[2]);
    FieldDerivs f;
    f.v = e * X.v * cy * cz + 1.0;
    f.dt = de * X.v * cy * cz;
    f.grad = {e * X.d1 * cy * cz, -e * kPi * X.v * sy * cz, -e * kPi * X.v * cy * sz};
    f.grad2 = {e * X.d2 * cy * cz, -e * kPi * kPi * X.v * cy * cz,
               -e * kPi * kPi * X.v * cy * cz};
    return f;
  }

  FieldDerivs concentration(const std::array<double, 3>& x, double t) const override {
    const Poly X = sextic_bump(x[0]);
    const double cy = std::cos(kPi * x[1]);
    const double sy = std::sin(kPi * x[1]);
    const double cz = std::cos(kPi * x[2]);
    const double sz = std::sin(kPi * x[2]);
    FieldDerivs f;
    f.v = 1.0 + t * X.v * cy * cz;
    f.dt = X.v * cy * cz;
    f.grad = {t * X.d1 * cy * cz, -t * kPi * X.v * sy * cz, -t * kPi * X.v * cy * sz};
    f.grad2 = {t * X.d2 * cy * cz, -t * kPi * kPi * X.v * cy * cz,
               -t * kPi * kPi * X.v * cy * cz};
    return f;
  }

  FieldDerivs temperature(const std::array<double, 3>& x, double t) const override {
    const double e = std::expm1(t);
    const double de = std::exp(t);
    const double cx = std::cos(kPi * x[0]);
    const double sx = std::sin(kPi * x[0]);
    const double cy = std::cos(kPi * x[1]);
    const double sy = std::sin(kPi * x[1]);
    const double cz = std::cos(kPi * x[2]);
    const double sz = std::sin(kPi * x[2]);
    FieldDerivs f;
    f.v = 0.5 * e * cx * cy * cz + 10.0;
    f.dt = 0.5 * de * cx * cy * cz;
    f.grad = {-0.5 * e * kPi * sx * cy * cz, -0.5 * e * kPi * cx * sy * cz,
              -0.5 * e * kPi * cx * cy * sz};
    const double lap = -0.5 * e * kPi * kPi * cx * cy * cz;
    f.grad2 = {lap, lap, lap};
    return f;
  }

  FieldDerivs porosity(const std::array<double, 3>& x, double t) const override {
    const double e = std::expm1(t);
    const double de = std::exp(t);
    const double cx = std::cos(kPi * x[0]);
    const double sx = std::sin(kPi * x[0]);
    const double sy = std::sin(kPi * x[1]);
    const double cy = std::cos(kPi * x[1]);
    const double cz = std::cos(kPi * x[2]);
    const double sz = std::sin(kPi * x[2]);
    FieldDerivs f;
    f.v = 0.25 * e * cx * sy * cz + 0.5;
    f.dt = 0.25 * de * cx * sy * cz;
    f.grad = {-0.25 * e * kPi * sx * sy * cz, 0.25 * e * kPi * cx * cy * cz,
              -0.25 * e * kPi * cx * sy * sz};
    const double lap = -0.25 * e * kPi * kPi * cx * sy * cz;
    f.grad2 = {lap, lap, lap};
    return f;
  }
};

}  // namespace

ManufacturedCase::ManufacturedCase() : params_(verification_params()) {}

double ManufacturedCase::velocity(Axis a, const std::array<double, 3>& x, double t) const {
  const FieldDerivs pr = pressure(x, t);
  const FieldDerivs ph = porosity(x, t);
  const double K = permeability(ph.v, initial_porosity(), initial_permeability());
  return -K / params_.mu * pr.grad[axis_index(a)];
}

double ManufacturedCase::velocity_divergence(const std::array<double, 3>& x, double t) const {
  const FieldDerivs pr = pressure(x, t);
  const FieldDerivs ph = porosity(x, t);
  const double phi0 = initial_porosity();
  const double u0 = 1.0 - phi0;
  const double scale = initial_permeability() * u0 * u0 / (phi0 * phi0 * phi0);
  const double u = 1.0 - ph.v;
  const double K = scale * ph.v * ph.v * ph.v / (u * u);
  const double dK = scale * ph.v * ph.v * (3.0 - ph.v) / (u * u * u);
  double cross = 0.0;
  double lap = 0.0;
  for (int a = 0; a < dim(); ++a) {
    cross += ph.grad[a] * pr.grad[a];
    lap += pr.grad2[a];
  }
  return -(dK * cross + K * lap) / params_.mu;
}

double ManufacturedCase::pressure_source(const std::array<double, 3>& x, double t) const {
  const FieldDerivs pr = pressure(x, t);
  const FieldDerivs ph = porosity(x, t);
  return params_.gamma * pr.dt + ph.dt + velocity_divergence(x, t);
}

double ManufacturedCase::concentration_source(const std::array<double, 3>& x, double t) const {
  const FieldDerivs ph = porosity(x, t);
  const FieldDerivs co = concentration(x, t);
  const FieldDerivs te = temperature(x, t);
  double conv = velocity_divergence(x, t) * co.v;
  double diff = 0.0;
  for (int a = 0; a < dim(); ++a) {
    conv += velocity(static_cast<Axis>(a), x, t) * co.grad[a];
    diff += params_.diffusivity[a] * (ph.grad[a] * co.grad[a] + ph.v * co.grad2[a]);
  }
  const double sink = interfacial_area(ph.v, initial_porosity(), params_.a0) *
                      reaction_rate(co.v, te.v, params_);
  return ph.dt * co.v + ph.v * co.dt + conv - diff + sink;
}

double ManufacturedCase::porosity_source(const std::array<double, 3>& x, double t) const {
  const FieldDerivs ph = porosity(x, t);
  const FieldDerivs co = concentration(x, t);
  const FieldDerivs te = temperature(x, t);
  const double gain = params_.alpha / params_.rho_s *
                      interfacial_area(ph.v, initial_porosity(), params_.a0) *
                      reaction_rate(co.v, te.v, params_);
  return ph.dt - gain;
}

double ManufacturedCase::temperature_source(const std::array<double, 3>& x, double t) const {
  const FieldDerivs ph = porosity(x, t);
  const FieldDerivs co = concentration(x, t);
  const FieldDerivs te = temperature(x, t);
  const double sigma = volumetric_heat_capacity(ph.v, params_);
  const double sigma_t = (params_.rho_f * params_.theta_f - params_.rho_s * params_.theta_s) * ph.dt;
  double conv = velocity_divergence(x, t) * te.v;
  double cond = 0.0;
  for (int a = 0; a < dim(); ++a) {
    conv += velocity(static_cast<Axis>(a), x, t) * te.grad[a];
    cond += (params_.lambda_f - params_.lambda_s) * ph.grad[a] * te.grad[a] +
            thermal_conductivity(ph.v, params_) * te.grad2[a];
  }
  const double heat = interfacial_area(ph.v, initial_porosity(), params_.a0) *
                      reaction_heat(te.v) * reaction_rate(co.v, te.v, params_);
  return sigma_t * te.v + sigma * te.dt + params_.rho_f * params_.theta_f * conv - cond - heat;
}

std::unique_ptr<ManufacturedCase> example1_case() { return std::make_unique<Example1>(); }
std::unique_ptr<ManufacturedCase> example2_case() { return std::make_unique<Example2>(); }

StaggeredGrid study_grid(const ManufacturedCase& c, int n) {
  return c.dim() == 2 ? StaggeredGrid::square(n) : StaggeredGrid::cube(n);
}

SimState initial_state(const ManufacturedCase& c, const StaggeredGrid& g) {
  SimState s(g);
  const int nz = g.dim() == 3 ? g.cells(Axis::Z) : 1;
  for (int l = 0; l < nz; ++l) {
    for (int j = 0; j < g.cells(Axis::Y); ++j) {
      for (int i = 0; i < g.cells(Axis::X); ++i) {
        const std::array<double, 3> x{g.center(Axis::X, i), g.center(Axis::Y, j),
                                      g.dim() == 3 ? g.center(Axis::Z, l) : 0.0};
        s.pressure(i, j, l) = c.pressure(x, 0.0).v;
        s.concentration(i, j, l) = c.concentration(x, 0.0).v;
        s.temperature(i, j, l) = c.temperature(x, 0.0).v;
        s.porosity(i, j, l) = c.porosity(x, 0.0).v;
      }
    }
  }
  s.initial_porosity.fill(c.initial_porosity());
  s.initial_permeability.fill(c.initial_permeability());
  return s;
}

SourceSpec manufactured_sources(const ManufacturedCase& c) {
  const ManufacturedCase* mc = &c;
  SourceSpec s;
  s.pressure_source = [mc](double x, double y, double z, double t) {
    return mc->pressure_source({x, y, z}, t);
  };
  s.concentration_source = [mc](double x, double y, double z, double t) {
    return mc->concentration_source({x, y, z}, t);
  };
  s.porosity_source = [mc](double x, double y, double z, double t) {
    return mc->porosity_source({x, y, z}, t);
  };
  s.temperature_source = [mc](double x, double y, double z, double t) {
    return mc->temperature_source({x, y, z}, t);
  };
  return s;
}

StepperOptions manufactured_options() {
  StepperOptions o;
  o.clamp_cmax = std::numeric_limits<double>::infinity();
  o.check_invariants = false;
  o.pressure_solver.tol = 1e-10;
  o.transport_solver.tol = 1e-10;
  return o;
}

ErrorTracker::ErrorTracker(const ManufacturedCase& c, const StaggeredGrid& g)
    : case_(&c), grid_(g) {}

void ErrorTracker::observe(const SimState& s) {
  const double t = s.time;
  const int nz = grid_.dim() == 3 ? grid_.cells(Axis::Z) : 1;

  CellField ephi(grid_);
  CellField ep(grid_);
  CellField ec(grid_);
  CellField et(grid_);
  for (int l = 0; l < nz; ++l) {
    for (int j = 0; j < grid_.cells(Axis::Y); ++j) {
      for (int i = 0; i < grid_.cells(Axis::X); ++i) {
        const std::array<double, 3> x{grid_.center(Axis::X, i), grid_.center(Axis::Y, j),
                                      grid_.dim() == 3 ? grid_.center(Axis::Z, l) : 0.0};
        ephi(i, j, l) = s.porosity(i, j, l) - case_->porosity(x, t).v;
        ep(i, j, l) = s.pressure(i, j, l) - case_->pressure(x, t).v;
        ec(i, j, l) = s.concentration(i, j, l) - case_->concentration(x, t).v;
        et(i, j, l) = s.temperature(i, j, l) - case_->temperature(x, t).v;
      }
    }
  }

  FaceField eu(grid_);
  for (int d = 0; d < grid_.dim(); ++d) {
    const Axis a = static_cast<Axis>(d);
    const int fi = grid_.cells(Axis::X) + (d == 0 ? 1 : 0);
    const int fj = grid_.cells(Axis::Y) + (d == 1 ? 1 : 0);
    const int fl = nz + (d == 2 ? 1 : 0);
    for (int l = 0; l < fl; ++l) {
      for (int j = 0; j < fj; ++j) {
        for (int i = 0; i < fi; ++i) {
          const std::array<int, 3> idx{i, j, l};
          std::array<double, 3> x{0.0, 0.0, 0.0};
          for (int b = 0; b < grid_.dim(); ++b) {
            const Axis ab = static_cast<Axis>(b);
            x[b] = (b == d) ? grid_.face(ab, idx[b]) : grid_.center(ab, idx[b]);
          }
          eu.at(a, i, j, l) = s.velocity.at(a, i, j, l) - case_->velocity(a, x, t);
        }
      }
    }
  }

  e_phi_ = std::max(e_phi_, norm_M(ephi));
  e_p_ = std::max(e_p_, norm_M(ep));
  e_c_ = std::max(e_c_, norm_M(ec));
  e_t_ = std::max(e_t_, norm_M(et));
  e_u_ = std::max(e_u_, norm_TM(eu));

  const double dt = t - prev_time_;
  double gc = 0.0;
  double gt = 0.0;
  for (int d = 0; d < grid_.dim(); ++d) {
    const Axis a = static_cast<Axis>(d);
    const double nc = norm_TM(d_face(ec, a));
    const double nt = norm_TM(d_face(et, a));
    gc += nc * nc;
    gt += nt * nt;
  }
  grad_c_sq_ += dt * gc;
  grad_t_sq_ += dt * gt;

  prev_time_ = t;
  ++steps_;
}

void ErrorTracker::require_history() const {
  if (steps_ == 0) {
    throw std::invalid_argument("error norms need at least one observed step");
  }
}

double ErrorTracker::porosity_error() const {
  require_history();
  return e_phi_;
}

double ErrorTracker::pressure_error() const {
  require_history();
  return e_p_;
}

double ErrorTracker::velocity_error() const {
  require_history();
  return e_u_;
}

double ErrorTracker::concentration_error() const {
  require_history();
  return e_c_;
}

double ErrorTracker::temperature_error() const {
  require_history();
  return e_t_;
}

double ErrorTracker::concentration_gradient_error() const {
  require_history();
  return std::sqrt(grad_c_sq_);
}

double ErrorTracker::temperature_gradient_error() const {
  require_history();
  return std::sqrt(grad_t_sq_);
}

std::vector<ConvergenceReport::RateRow> ConvergenceReport::rates() const {
  std::vector<RateRow> out;
  for (std::size_t k = 1; k < meshes.size(); ++k) {
    const MeshResult& coarse = meshes[k - 1];
    const MeshResult& fine = meshes[k];
    if (fine.cells != 2 * coarse.cells) {
      continue;
    }
    RateRow row;
    row.coarse = coarse.cells;
    row.fine = fine.cells;
    const auto ec = coarse.tracked();
    const auto ef = fine.tracked();
    for (int q = 0; q < 5; ++q) {
      row.rate[q] = std::log2(ec[q] / ef[q]);
    }
    out.push_back(row);
  }
  return out;
}

namespace {

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

// Rate attached to the row of the finer mesh of each valid pair.
std::array<const double*, 5> rate_for(const std::vector<ConvergenceReport::RateRow>& rows,
                                      int cells) {
  std::array<const double*, 5> out{};
  for (const auto& r : rows) {
    if (r.fine == cells) {
      for (int q = 0; q < 5; ++q) {
        out[q] = &r.rate[q];
      }
    }
  }
  return out;
}

}  // namespace

std::string ConvergenceReport::csv() const {
  const auto rate_rows = rates();
  std::string out =
      "cells,h,E_phi,rate_phi,E_p,rate_p,E_u,rate_u,E_c,rate_c,E_T,rate_T,"
      "E_grad_c,E_grad_T\n";
  for (const MeshResult& m : meshes) {
    out += std::to_string(m.cells) + ',' + format("%.8e", m.h);
    const auto tr = m.tracked();
    const auto rt = rate_for(rate_rows, m.cells);
    for (int q = 0; q < 5; ++q) {
      out += ',' + format("%.8e", tr[q]);
      out += ',';
      if (rt[q] != nullptr) {
        out += format("%.3f", *rt[q]);
      }
    }
    out += ',' + format("%.8e", m.e_grad_concentration);
    out += ',' + format("%.8e", m.e_grad_temperature);
    out += '\n';
  }
  return out;
}

std::string ConvergenceReport::table() const {
  const auto rate_rows = rates();
  std::string out = "case " + case_name + ", dt = h^2, errors are maxima over all steps\n";
  char head[160];
  std::snprintf(head, sizeof head, "%8s %12s %6s %12s %6s %12s %6s %12s %6s %12s %6s\n", "h",
                "E_phi", "rate", "E_p", "rate", "E_u", "rate", "E_c", "rate", "E_T", "rate");
  out += head;
  for (const MeshResult& m : meshes) {
    char hcol[16];
    std::snprintf(hcol, sizeof hcol, "1/%d", m.cells);
    const auto tr = m.tracked();
    const auto rt = rate_for(rate_rows, m.cells);
    std::string cols;
    for (int q = 0; q < 5; ++q) {
      char cell[40];
      if (rt[q] != nullptr) {
        std::snprintf(cell, sizeof cell, " %12.4e %6.2f", tr[q], *rt[q]);
      } else {
        std::snprintf(cell, sizeof cell, " %12.4e %6s", tr[q], "-");
      }
      cols += cell;
    }
    char line[256];
    std::snprintf(line, sizeof line, "%8s%s\n", hcol, cols.c_str());
    out += line;
  }
  return out;
}

ConvergenceReport run_convergence_study(const ManufacturedCase& c, std::span<const int> meshes,
                                        const MeshCallback& on_mesh) {
  ConvergenceReport rep;
  rep.case_name = c.name();
  for (const int n : meshes) {
    if (n < 2) {
      throw ConfigError("convergence study: need at least 2 cells per axis, got " +
                        std::to_string(n));
    }
    const StaggeredGrid g = study_grid(c, n);
    const double h = g.spacing(Axis::X);
    const double dt = h * h;
    const std::int64_t steps = static_cast<std::int64_t>(n) * n;

    Stepper stepper(c.params(), manufactured_sources(c), BoundarySpec{}, manufactured_options());
    SimState s = initial_state(c, g);
    ErrorTracker tracker(c, g);
    for (std::int64_t k = 0; k < steps; ++k) {
      stepper.advance(s, dt);
      tracker.observe(s);
    }

    MeshResult r;
    r.cells = n;
    r.h = h;
    r.e_porosity = tracker.porosity_error();
    r.e_pressure = tracker.pressure_error();
    r.e_velocity = tracker.velocity_error();
    r.e_concentration = tracker.concentration_error();
    r.e_temperature = tracker.temperature_error();
    r.e_grad_concentration = tracker.concentration_gradient_error();
    r.e_grad_temperature = tracker.temperature_gradient_error();
    rep.meshes.push_back(r);
    if (on_mesh) {
      on_mesh(r);
    }
  }
  return rep;
}

}  // namespace wormsim::mms
