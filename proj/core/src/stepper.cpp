#include "wormsim/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "wormsim/errors.hpp"

namespace wormsim {

TimeControl TimeControl::from_duration(double dt, double duration) {
  if (!(dt > 0.0)) throw ConfigError("time control: dt must be positive");
  if (!(duration > 0.0)) throw ConfigError("time control: duration must be positive");
  const double raw = duration / dt;
  const double rounded = std::round(raw);
  if (rounded < 1.0 || std::abs(raw - rounded) > 1e-9 * std::max(1.0, raw))
    throw ConfigError("time control: duration " + std::to_string(duration) +
                      " is not a whole number of steps of dt " + std::to_string(dt));
  return TimeControl{dt, static_cast<std::int64_t>(rounded)};
}

void TimeControl::validate() const {
  if (!(dt > 0.0) || n_steps < 1)
    throw ConfigError("time control: need dt > 0 and at least one step");
}

SimState::SimState(const StaggeredGrid& g)
    : grid(g),
      pressure(g, 0.0, FieldRole::Pressure),
      concentration(g),  // sign not guaranteed by the scheme, so no range role
      temperature(g, 0.0, FieldRole::Temperature),
      porosity(g, 0.0, FieldRole::Porosity),
      initial_porosity(g),
      initial_permeability(g),
      velocity(g),
      solute_flux(g),
      heat_flux(g) {}

namespace {

double source_at(const SourceFn& fn, const StaggeredGrid& g, int i, int j, int l, double t) {
  const double x = g.center(Axis::X, i);
  const double y = g.center(Axis::Y, j);
  const double z = g.dim() == 3 ? g.center(Axis::Z, l) : 0.0;
  return fn(x, y, z, t);
}

// Values on the two faces of cell (i,j,l) along one axis.
struct FacePair {
  double lo, hi;
};

FacePair faces_of(const FaceField& f, Axis a, int i, int j, int l) {
  switch (a) {
    case Axis::X:
      return {f.at(a, i, j, l), f.at(a, i + 1, j, l)};
    case Axis::Y:
      return {f.at(a, i, j, l), f.at(a, i, j + 1, l)};
    default:
      return {f.at(a, i, j, l), f.at(a, i, j, l + 1)};
  }
}

void require_source_grid(const CellField& src, const StaggeredGrid& g, const char* what) {
  if (src.size() > 0 && src.size() != g.cell_count())
    throw std::invalid_argument(std::string("stepper: ") + what +
                                " field does not match the grid");
}

}  // namespace

Stepper::Stepper(PhysParams params, SourceSpec sources, BoundarySpec bc, StepperOptions opts)
    : params_(std::move(params)),
      sources_(std::move(sources)),
      bc_(std::move(bc)),
      opts_(std::move(opts)) {
  params_.validate();
  if (!(opts_.clamp_cmax > 0.0))
    throw ConfigError("stepper: concentration clamp bound must be positive");
  if (!(opts_.perm_phi_cap > 0.0 && opts_.perm_phi_cap < 1.0))
    throw ConfigError("stepper: permeability porosity cap must lie in (0,1)");
}

void Stepper::require_medium(const SimState& s) const {
  const auto& phi0 = s.initial_porosity;
  const auto& k0 = s.initial_permeability;
  if (phi0.size() != s.grid.cell_count() || k0.size() != s.grid.cell_count())
    throw InvariantError("porous medium: initial porosity/permeability not initialized");
  for (std::int64_t k = 0; k < phi0.size(); ++k) {
    if (!(phi0[k] > 0.0 && phi0[k] < 1.0))
      throw InvariantError("porous medium: initial porosity " + std::to_string(phi0[k]) +
                           " out of (0,1) at cell " + std::to_string(k));
    if (!(std::isfinite(k0[k]) && k0[k] > 0.0))
      throw InvariantError("porous medium: initial permeability must be positive at cell " +
                           std::to_string(k));
  }
}

CellField Stepper::porosity_step(const SimState& s, double dt) {
  require_medium(s);
  const StaggeredGrid& g = s.grid;
  const double scale = params_.alpha * params_.k_c * params_.a0 / params_.rho_s;
  const double t_new = s.time + dt;
  CellField out = s.porosity;

  const int nz = g.dim() == 3 ? g.cells(Axis::Z) : 1;
  std::int64_t id = 0;
  for (int l = 0; l < nz; ++l)
    for (int j = 0; j < g.cells(Axis::Y); ++j)
      for (int i = 0; i < g.cells(Axis::X); ++i, ++id) {
        const double r = reaction_factor(s.temperature[id], params_);
        const double cbar = clamp_conc(s.concentration[id], opts_.clamp_cmax);
        const double beta = scale * r * cbar * dt / (1.0 - s.initial_porosity[id]);
        out[id] = (beta + s.porosity[id]) / (1.0 + beta);
        if (sources_.porosity_source)
          out[id] += dt * source_at(sources_.porosity_source, g, i, j, l, t_new);
      }
  return out;
}

std::pair<CellField, FaceField> Stepper::pressure_velocity_step(const SimState& s,
                                                                const CellField& psi_new,
                                                                double dt) {
  const StaggeredGrid& g = s.grid;
  require_source_grid(sources_.injection_rate, g, "injection rate");
  require_source_grid(sources_.production_rate, g, "production rate");
  const double t_new = s.time + dt;
  const double gdt = params_.gamma / dt;

  diag_.perm_clips = PermClipStats{};
  FaceField mobility(g);
  for (int a = 0; a < g.dim(); ++a) {
    const Axis ax = static_cast<Axis>(a);
    const FaceField psi_f = interp_face(psi_new, ax);
    const FaceField phi0_f = interp_face(s.initial_porosity, ax);
    const FaceField k0_f = interp_face(s.initial_permeability, ax);
    auto m = mobility.component(ax);
    const auto pf = psi_f.component(ax);
    const auto p0 = phi0_f.component(ax);
    const auto k0 = k0_f.component(ax);
    for (std::size_t k = 0; k < m.size(); ++k)
      m[k] = permeability(pf[k], p0[k], k0[k], opts_.perm_phi_cap, &diag_.perm_clips) / params_.mu;
  }

  const int n[3] = {g.cells(Axis::X), g.cells(Axis::Y), g.dim() == 3 ? g.cells(Axis::Z) : 1};
  const bool has_fi = sources_.injection_rate.size() > 0;
  const bool has_fp = sources_.production_rate.size() > 0;

  std::vector<double> rhs(static_cast<std::size_t>(g.cell_count()));
  std::int64_t id = 0;
  for (int l = 0; l < n[2]; ++l)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i, ++id) {
        double v = gdt * s.pressure[id] - (psi_new[id] - s.porosity[id]) / dt;
        if (has_fi) v += sources_.injection_rate[id];
        if (has_fp) v += sources_.production_rate[id];
        if (sources_.pressure_source)
          v += source_at(sources_.pressure_source, g, i, j, l, t_new);
        rhs[id] = v;
      }

  auto row_of = [&](int i, int j, int l) {
    StencilRow row;
    row.diag = gdt;
    const int c[3] = {i, j, l};
    for (int a = 0; a < g.dim(); ++a) {
      const Axis ax = static_cast<Axis>(a);
      const double h2 = g.spacing(ax) * g.spacing(ax);
      const FacePair m = faces_of(mobility, ax, i, j, l);
      if (c[a] > 0) {
        row.diag += m.lo / h2;
        row.off[2 * a] = -m.lo / h2;
      }
      if (c[a] < n[a] - 1) {
        row.diag += m.hi / h2;
        row.off[2 * a + 1] = -m.hi / h2;
      }
    }
    return row;
  };
  const BandedSystem sys = assemble(g, row_of, rhs, true, opts_.dominance);
  const std::vector<double> x = solve(sys, diag_.pressure, opts_.pressure_solver,
                                      s.pressure.values());

  CellField p_new(g, 0.0, FieldRole::Pressure);
  std::copy(x.begin(), x.end(), p_new.values().begin());

  FaceField u_new(g);
  for (int a = 0; a < g.dim(); ++a) {
    const Axis ax = static_cast<Axis>(a);
    const double h = g.spacing(ax);
    int fn[3] = {n[0], n[1], n[2]};
    fn[a] += 1;
    for (int l = 0; l < fn[2]; ++l)
      for (int j = 0; j < fn[1]; ++j)
        for (int i = 0; i < fn[0]; ++i) {
          const int f[3] = {i, j, l};
          if (f[a] == 0 || f[a] == fn[a] - 1) continue;  // walls carry no flow
          int lo[3] = {i, j, l};
          lo[a] -= 1;
          const double dp = (p_new(i, j, l) - p_new(lo[0], lo[1], lo[2])) / h;
          u_new.at(ax, i, j, l) = -mobility.at(ax, i, j, l) * dp;
        }
  }
  return {std::move(p_new), std::move(u_new)};
}

std::pair<CellField, FaceField> Stepper::concentration_step(const SimState& s,
                                                            const CellField& psi_new,
                                                            const FaceField& u_new, double dt) {
  const StaggeredGrid& g = s.grid;
  require_source_grid(sources_.injection_rate, g, "injection rate");
  require_source_grid(sources_.production_rate, g, "production rate");
  const double t_new = s.time + dt;
  const int n[3] = {g.cells(Axis::X), g.cells(Axis::Y), g.dim() == 3 ? g.cells(Axis::Z) : 1};
  const bool has_fi = sources_.injection_rate.size() > 0;
  const bool has_fp = sources_.production_rate.size() > 0;

  FaceField diffus(g);
  for (int a = 0; a < g.dim(); ++a) {
    const Axis ax = static_cast<Axis>(a);
    const FaceField psi_f = interp_face(psi_new, ax);
    auto d = diffus.component(ax);
    const auto pf = psi_f.component(ax);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = pf[k] * params_.diffusivity[a];
  }

  std::vector<double> rhs(static_cast<std::size_t>(g.cell_count()));
  std::int64_t id = 0;
  for (int l = 0; l < n[2]; ++l)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i, ++id) {
        double v = s.porosity[id] * s.concentration[id] / dt;
        if (has_fi) v += sources_.injection_rate[id] * sources_.injected_conc;
        if (sources_.concentration_source)
          v += source_at(sources_.concentration_source, g, i, j, l, t_new);
        rhs[id] = v;
      }

  auto row_of = [&](int i, int j, int l) {
    const std::int64_t k = g.cell_index(i, j, l);
    StencilRow row;
    row.diag = psi_new[k] / dt +
               params_.k_c * interfacial_area(psi_new[k], s.initial_porosity[k], params_.a0) *
                   reaction_factor(s.temperature[k], params_);
    if (has_fp) row.diag -= sources_.production_rate[k];
    const int c[3] = {i, j, l};
    for (int a = 0; a < g.dim(); ++a) {
      const Axis ax = static_cast<Axis>(a);
      const double h = g.spacing(ax);
      const double h2 = h * h;
      const FacePair d = faces_of(diffus, ax, i, j, l);
      const FacePair u = faces_of(u_new, ax, i, j, l);
      if (c[a] > 0) {
        row.diag += d.lo / h2 - u.lo / (2.0 * h);
        row.off[2 * a] = -d.lo / h2 - u.lo / (2.0 * h);
      }
      if (c[a] < n[a] - 1) {
        row.diag += d.hi / h2 + u.hi / (2.0 * h);
        row.off[2 * a + 1] = -d.hi / h2 + u.hi / (2.0 * h);
      }
    }
    return row;
  };
  const BandedSystem sys = assemble(g, row_of, rhs, false, opts_.dominance);
  diag_.concentration_dominance = sys.dominance();
  const std::vector<double> x = solve(sys, diag_.concentration, opts_.transport_solver,
                                      s.concentration.values());

  CellField c_new(g);
  std::copy(x.begin(), x.end(), c_new.values().begin());

  FaceField w_new(g);
  for (int a = 0; a < g.dim(); ++a) {
    const Axis ax = static_cast<Axis>(a);
    const double h = g.spacing(ax);
    int fn[3] = {n[0], n[1], n[2]};
    fn[a] += 1;
    for (int l = 0; l < fn[2]; ++l)
      for (int j = 0; j < fn[1]; ++j)
        for (int i = 0; i < fn[0]; ++i) {
          const int f[3] = {i, j, l};
          if (f[a] == 0 || f[a] == fn[a] - 1) continue;
          int lo[3] = {i, j, l};
          lo[a] -= 1;
          const double mean = 0.5 * (c_new(i, j, l) + c_new(lo[0], lo[1], lo[2]));
          const double slope = (c_new(i, j, l) - c_new(lo[0], lo[1], lo[2])) / h;
          w_new.at(ax, i, j, l) = u_new.at(ax, i, j, l) * mean - diffus.at(ax, i, j, l) * slope;
        }
  }
  return {std::move(c_new), std::move(w_new)};
}

std::pair<CellField, FaceField> Stepper::temperature_step(const SimState& s,
                                                          const CellField& psi_new,
                                                          const FaceField& u_new,
                                                          const CellField& conc_new, double dt) {
  const StaggeredGrid& g = s.grid;
  const double t_new = s.time + dt;
  const double adv = params_.rho_f * params_.theta_f;
  const int n[3] = {g.cells(Axis::X), g.cells(Axis::Y), g.dim() == 3 ? g.cells(Axis::Z) : 1};

  FaceField conduct(g);
  for (int a = 0; a < g.dim(); ++a) {
    const Axis ax = static_cast<Axis>(a);
    const FaceField psi_f = interp_face(psi_new, ax);
    auto c = conduct.component(ax);
    const auto pf = psi_f.component(ax);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = thermal_conductivity(pf[k], params_);
  }

  std::vector<double> rhs(static_cast<std::size_t>(g.cell_count()));
  std::int64_t id = 0;
  for (int l = 0; l < n[2]; ++l)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i, ++id) {
        const double sigma_old = volumetric_heat_capacity(s.porosity[id], params_);
        const double cbar = clamp_conc(conc_new[id], opts_.clamp_cmax);
        double v = sigma_old * s.temperature[id] / dt +
                   interfacial_area(psi_new[id], s.initial_porosity[id], params_.a0) *
                       reaction_heat(s.temperature[id]) *
                       reaction_rate(cbar, s.temperature[id], params_);
        if (sources_.temperature_source)
          v += source_at(sources_.temperature_source, g, i, j, l, t_new);
        // Fixed-value walls: ghost reflection puts 2*lambda_b/h^2 on the
        // diagonal and the matching boundary-value term here.
        const int c[3] = {i, j, l};
        for (int a = 0; a < g.dim(); ++a) {
          const Axis ax = static_cast<Axis>(a);
          const double h2 = g.spacing(ax) * g.spacing(ax);
          const FacePair lam = faces_of(conduct, ax, i, j, l);
          const SideCondition& lo_bc = bc_.temperature[2 * a];
          const SideCondition& hi_bc = bc_.temperature[2 * a + 1];
          if (c[a] == 0 && lo_bc.fixed) v += 2.0 * lam.lo * lo_bc.value / h2;
          if (c[a] == n[a] - 1 && hi_bc.fixed) v += 2.0 * lam.hi * hi_bc.value / h2;
        }
        rhs[id] = v;
      }

  auto row_of = [&](int i, int j, int l) {
    const std::int64_t k = g.cell_index(i, j, l);
    StencilRow row;
    row.diag = volumetric_heat_capacity(psi_new[k], params_) / dt;
    const int c[3] = {i, j, l};
    for (int a = 0; a < g.dim(); ++a) {
      const Axis ax = static_cast<Axis>(a);
      const double h = g.spacing(ax);
      const double h2 = h * h;
      const FacePair lam = faces_of(conduct, ax, i, j, l);
      const FacePair u = faces_of(u_new, ax, i, j, l);
      if (c[a] > 0) {
        row.diag += lam.lo / h2 - adv * u.lo / (2.0 * h);
        row.off[2 * a] = -lam.lo / h2 - adv * u.lo / (2.0 * h);
      } else if (bc_.temperature[2 * a].fixed) {
        row.diag += 2.0 * lam.lo / h2;
      }
      if (c[a] < n[a] - 1) {
        row.diag += lam.hi / h2 + adv * u.hi / (2.0 * h);
        row.off[2 * a + 1] = -lam.hi / h2 + adv * u.hi / (2.0 * h);
      } else if (bc_.temperature[2 * a + 1].fixed) {
        row.diag += 2.0 * lam.hi / h2;
      }
    }
    return row;
  };
  const BandedSystem sys = assemble(g, row_of, rhs, false, opts_.dominance);
  diag_.temperature_dominance = sys.dominance();
  const std::vector<double> x = solve(sys, diag_.temperature, opts_.transport_solver,
                                      s.temperature.values());

  CellField z_new(g, 0.0, FieldRole::Temperature);
  std::copy(x.begin(), x.end(), z_new.values().begin());

  FaceField v_new(g);
  for (int a = 0; a < g.dim(); ++a) {
    const Axis ax = static_cast<Axis>(a);
    const double h = g.spacing(ax);
    int fn[3] = {n[0], n[1], n[2]};
    fn[a] += 1;
    for (int l = 0; l < fn[2]; ++l)
      for (int j = 0; j < fn[1]; ++j)
        for (int i = 0; i < fn[0]; ++i) {
          const int f[3] = {i, j, l};
          int lo[3] = {i, j, l};
          lo[a] -= 1;
          if (f[a] == 0) {
            const SideCondition& bcs = bc_.temperature[2 * a];
            if (bcs.fixed)
              v_new.at(ax, i, j, l) =
                  -2.0 * conduct.at(ax, i, j, l) * (z_new(i, j, l) - bcs.value) / h;
            continue;
          }
          if (f[a] == fn[a] - 1) {
            const SideCondition& bcs = bc_.temperature[2 * a + 1];
            if (bcs.fixed)
              v_new.at(ax, i, j, l) =
                  2.0 * conduct.at(ax, i, j, l) * (z_new(lo[0], lo[1], lo[2]) - bcs.value) / h;
            continue;
          }
          const double mean = 0.5 * (z_new(i, j, l) + z_new(lo[0], lo[1], lo[2]));
          const double slope = (z_new(i, j, l) - z_new(lo[0], lo[1], lo[2])) / h;
          v_new.at(ax, i, j, l) =
              adv * u_new.at(ax, i, j, l) * mean - conduct.at(ax, i, j, l) * slope;
        }
  }
  return {std::move(z_new), std::move(v_new)};
}

void Stepper::advance(SimState& s, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("advance: dt must be positive");
  diag_ = StepDiagnostics{};

  CellField psi_new = porosity_step(s, dt);

  double max_rate = 0.0;
  for (std::int64_t k = 0; k < psi_new.size(); ++k)
    max_rate = std::max(max_rate, (psi_new[k] - s.porosity[k]) / dt);
  diag_.max_porosity_rate = max_rate;

  if (opts_.check_invariants && !sources_.porosity_source) {
    const double scale = params_.alpha * params_.k_c * params_.a0 / params_.rho_s;
    for (std::int64_t k = 0; k < psi_new.size(); ++k) {
      if (!(psi_new[k] >= s.porosity[k]))
        throw InvariantError("advance: porosity decreased at cell " + std::to_string(k));
      if (!(psi_new[k] < 1.0))
        throw InvariantError("advance: porosity reached 1 at cell " + std::to_string(k));
      if (scale > 0.0 && std::isfinite(opts_.clamp_cmax)) {
        const double bound = scale * opts_.clamp_cmax / (1.0 - s.initial_porosity[k]);
        const double rate = (psi_new[k] - s.porosity[k]) / dt;
        if (!(rate < bound))
          throw InvariantError("advance: porosity rate " + std::to_string(rate) +
                               " exceeds the dissolution bound " + std::to_string(bound) +
                               " at cell " + std::to_string(k));
      }
    }
    psi_new.validate();
  }

  auto [p_new, u_new] = pressure_velocity_step(s, psi_new, dt);
  auto [c_new, w_new] = concentration_step(s, psi_new, u_new, dt);
  auto [z_new, v_new] = temperature_step(s, psi_new, u_new, c_new, dt);

  if (!p_new.all_finite() || !c_new.all_finite() || !z_new.all_finite() || !psi_new.all_finite())
    throw InvariantError("advance: non-finite field after step " + std::to_string(s.step + 1));
  if (opts_.check_invariants) z_new.validate();

  s.porosity = std::move(psi_new);
  s.pressure = std::move(p_new);
  s.concentration = std::move(c_new);
  s.temperature = std::move(z_new);
  s.velocity = std::move(u_new);
  s.solute_flux = std::move(w_new);
  s.heat_flux = std::move(v_new);
  s.step += 1;
  s.time += dt;
}

}  // namespace wormsim
