#include "wormsim/scenario.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "wormsim/errors.hpp"

namespace wormsim {

namespace {

const char* axis_label(Axis a) {
  switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    default: return "z";
  }
}

// Shortest decimal form that parses back to the same double, so serialized
// configs and snapshots round-trip exactly.
std::string num_str(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_line(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view tok, int line) {
  const std::string s(trim(tok));
  if (s.empty()) bad_line(line, "expected a number");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) bad_line(line, "malformed number '" + s + "'");
  return v;
}

std::int64_t parse_integer(std::string_view tok, int line) {
  const std::string s(trim(tok));
  if (s.empty()) bad_line(line, "expected an integer");
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) bad_line(line, "malformed integer '" + s + "'");
  return static_cast<std::int64_t>(v);
}

bool parse_boolean(std::string_view tok, int line) {
  const std::string_view s = trim(tok);
  if (s == "true") return true;
  if (s == "false") return false;
  bad_line(line, "expected true or false, got '" + std::string(s) + "'");
}

std::string parse_string(std::string_view tok, int line) {
  const std::string_view s = trim(tok);
  if (s.size() < 2 || s.front() != '"' || s.back() != '"')
    bad_line(line, "expected a quoted string, got '" + std::string(s) + "'");
  return std::string(s.substr(1, s.size() - 2));
}

std::vector<double> parse_array(std::string_view tok, int line) {
  std::string_view s = trim(tok);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    bad_line(line, "expected an array [..], got '" + std::string(s) + "'");
  s = s.substr(1, s.size() - 2);
  std::vector<double> out;
  while (true) {
    const std::size_t comma = s.find(',');
    const std::string_view item = comma == std::string_view::npos ? s : s.substr(0, comma);
    if (!trim(item).empty()) out.push_back(parse_number(item, line));
    if (comma == std::string_view::npos) break;
    s = s.substr(comma + 1);
  }
  if (out.empty()) bad_line(line, "array must not be empty");
  return out;
}

SolveMethod parse_method(std::string_view tok, int line) {
  const std::string s = parse_string(tok, line);
  if (s == "auto") return SolveMethod::Auto;
  if (s == "cg") return SolveMethod::CG;
  if (s == "bicgstab") return SolveMethod::BiCGStab;
  if (s == "band_lu") return SolveMethod::BandLU;
  if (s == "dense_lu") return SolveMethod::DenseLU;
  bad_line(line, "unknown solver method '" + s +
                     "' (valid: auto, cg, bicgstab, band_lu, dense_lu)");
}

const char* method_name(SolveMethod m) {
  switch (m) {
    case SolveMethod::Auto: return "auto";
    case SolveMethod::CG: return "cg";
    case SolveMethod::BiCGStab: return "bicgstab";
    case SolveMethod::BandLU: return "band_lu";
    default: return "dense_lu";
  }
}

constexpr std::array<const char*, 6> kSideNames{"x_lo", "x_hi", "y_lo", "y_hi", "z_lo", "z_hi"};

// Fills diffusivity from a scalar (isotropic), a 2-entry array (z mirrors y)
// or a full 3-entry array.
void set_diffusivity(PhysParams& p, const std::vector<double>& d, int line) {
  if (d.size() == 1) {
    p.set_isotropic_diffusivity(d[0]);
  } else if (d.size() == 2) {
    p.diffusivity = {d[0], d[1], d[1]};
  } else if (d.size() == 3) {
    p.diffusivity = {d[0], d[1], d[2]};
  } else {
    bad_line(line, "diffusivity takes 1, 2 or 3 entries");
  }
}

void apply_key(ScenarioConfig& cfg, const std::string& section, std::string_view key,
               std::string_view rhs, int line) {
  auto unknown = [&]() -> void {
    bad_line(line, "unknown key '" + std::string(key) + "' in [" + section + "]");
  };

  if (section.empty()) {
    if (key == "name")
      cfg.name = parse_string(rhs, line);
    else
      bad_line(line, "key '" + std::string(key) + "' before any section (only name is allowed)");
    return;
  }

  if (section == "grid") {
    if (key == "cells") {
      const auto v = parse_array(rhs, line);
      if (v.size() != 2 && v.size() != 3) bad_line(line, "cells takes 2 or 3 entries");
      cfg.cells = {0, 0, 0};
      for (std::size_t a = 0; a < v.size(); ++a) {
        const double r = std::round(v[a]);
        if (v[a] != r) bad_line(line, "cell counts must be integers");
        cfg.cells[a] = static_cast<int>(r);
      }
    } else if (key == "extent") {
      const auto v = parse_array(rhs, line);
      if (v.size() != 2 && v.size() != 3) bad_line(line, "extent takes 2 or 3 entries");
      cfg.extent = {0.0, 0.0, 0.0};
      for (std::size_t a = 0; a < v.size(); ++a) cfg.extent[a] = v[a];
    } else {
      unknown();
    }
    return;
  }

  if (section == "time") {
    if (key == "dt")
      cfg.time.dt = parse_number(rhs, line);
    else if (key == "steps")
      cfg.time.n_steps = parse_integer(rhs, line);
    else
      unknown();
    return;
  }

  if (section == "physics") {
    PhysParams& p = cfg.phys;
    if (key == "alpha") p.alpha = parse_number(rhs, line);
    else if (key == "rho_s") p.rho_s = parse_number(rhs, line);
    else if (key == "a0") p.a0 = parse_number(rhs, line);
    else if (key == "k_c") p.k_c = parse_number(rhs, line);
    else if (key == "k_s0") p.k_s0 = parse_number(rhs, line);
    else if (key == "E_g") p.E_g = parse_number(rhs, line);
    else if (key == "R_g") p.R_g = parse_number(rhs, line);
    else if (key == "T0") p.T0 = parse_number(rhs, line);
    else if (key == "gamma") p.gamma = parse_number(rhs, line);
    else if (key == "mu") p.mu = parse_number(rhs, line);
    else if (key == "diffusivity") set_diffusivity(p, parse_array(rhs, line), line);
    else if (key == "rho_f") p.rho_f = parse_number(rhs, line);
    else if (key == "theta_s") p.theta_s = parse_number(rhs, line);
    else if (key == "theta_f") p.theta_f = parse_number(rhs, line);
    else if (key == "lambda_s") p.lambda_s = parse_number(rhs, line);
    else if (key == "lambda_f") p.lambda_f = parse_number(rhs, line);
    else unknown();
    return;
  }

  if (section == "limits") {
    if (key == "clamp_cmax")
      cfg.clamp_cmax = parse_number(rhs, line);
    else if (key == "perm_phi_cap")
      cfg.perm_phi_cap = parse_number(rhs, line);
    else
      unknown();
    return;
  }

  if (section == "initial") {
    if (key == "porosity") cfg.initial_porosity = parse_number(rhs, line);
    else if (key == "permeability") cfg.initial_permeability = parse_number(rhs, line);
    else if (key == "pressure") cfg.initial_pressure = parse_number(rhs, line);
    else if (key == "concentration") cfg.initial_concentration = parse_number(rhs, line);
    else if (key == "temperature") cfg.initial_temperature = parse_number(rhs, line);
    else unknown();
    return;
  }

  if (section == "seed") {
    if (cfg.seeds.empty()) bad_line(line, "seed keys outside a [[seed]] block");
    SeedCell& sd = cfg.seeds.back();
    if (key == "at") {
      const auto v = parse_array(rhs, line);
      if (v.size() != 2 && v.size() != 3) bad_line(line, "seed position takes 2 or 3 entries");
      sd.at = {0.0, 0.0, 0.0};
      for (std::size_t a = 0; a < v.size(); ++a) sd.at[a] = v[a];
    } else if (key == "porosity") {
      sd.porosity = parse_number(rhs, line);
    } else if (key == "permeability") {
      sd.permeability = parse_number(rhs, line);
    } else {
      unknown();
    }
    return;
  }

  if (section == "wells") {
    WellSpec& w = cfg.wells;
    if (key == "injection_x") w.injection_x = parse_number(rhs, line);
    else if (key == "injection_rate") w.injection_rate = parse_number(rhs, line);
    else if (key == "production_x") w.production_x = parse_number(rhs, line);
    else if (key == "production_rate") w.production_rate = parse_number(rhs, line);
    else if (key == "injected_conc") w.injected_conc = parse_number(rhs, line);
    else unknown();
    return;
  }

  if (section == "boundary") {
    for (int side = 0; side < 6; ++side) {
      if (key == std::string("temperature_") + kSideNames[side]) {
        cfg.boundary.temperature[side] = {true, parse_number(rhs, line)};
        return;
      }
    }
    unknown();
    return;
  }

  if (section == "solver") {
    SolverConfig& sv = cfg.solver;
    if (key == "pressure_method") sv.pressure.method = parse_method(rhs, line);
    else if (key == "pressure_tol") sv.pressure.tol = parse_number(rhs, line);
    else if (key == "pressure_max_iter") sv.pressure.max_iter = parse_integer(rhs, line);
    else if (key == "pressure_backward_error")
      sv.pressure.accept_backward_error = parse_boolean(rhs, line);
    else if (key == "transport_method") sv.transport.method = parse_method(rhs, line);
    else if (key == "transport_tol") sv.transport.tol = parse_number(rhs, line);
    else if (key == "transport_max_iter") sv.transport.max_iter = parse_integer(rhs, line);
    else if (key == "transport_backward_error")
      sv.transport.accept_backward_error = parse_boolean(rhs, line);
    else if (key == "dominance") {
      const std::string s = parse_string(rhs, line);
      if (s == "strict") sv.dominance = DominancePolicy::Strict;
      else if (s == "monitor") sv.dominance = DominancePolicy::Monitor;
      else bad_line(line, "dominance must be \"strict\" or \"monitor\"");
    } else {
      unknown();
    }
    return;
  }

  if (section == "output") {
    if (key == "snapshots") {
      cfg.output.snapshots = parse_integer(rhs, line);
    } else if (key == "directory") {
      cfg.output.directory = parse_string(rhs, line);
    } else if (key == "format") {
      const std::string s = parse_string(rhs, line);
      if (s == "csv") cfg.output.format = OutputFormat::Csv;
      else if (s == "vtk") cfg.output.format = OutputFormat::Vtk;
      else if (s == "both") cfg.output.format = OutputFormat::Both;
      else bad_line(line, "format must be \"csv\", \"vtk\" or \"both\"");
    } else {
      unknown();
    }
    return;
  }
}

// Strips a trailing comment, honoring quotes so '#' may appear in strings.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] == '"') quoted = !quoted;
    if (s[k] == '#' && !quoted) return s.substr(0, k);
  }
  return s;
}

constexpr std::array<const char*, 9> kSections{"grid",  "time",     "physics",
                                               "limits", "initial", "wells",
                                               "boundary", "solver", "output"};

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig cfg;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::string_view ln = trim(strip_comment(raw));
    if (ln.empty()) continue;

    if (ln.starts_with("[[")) {
      if (trim(ln) != "[[seed]]")
        bad_line(line_no, "only [[seed]] blocks may repeat, got '" + std::string(ln) + "'");
      cfg.seeds.emplace_back();
      section = "seed";
      continue;
    }
    if (ln.front() == '[') {
      if (ln.back() != ']') bad_line(line_no, "unterminated section header");
      const std::string name(trim(ln.substr(1, ln.size() - 2)));
      if (std::find(kSections.begin(), kSections.end(), name) == kSections.end())
        bad_line(line_no, "unknown section [" + name + "]");
      section = name;
      continue;
    }

    const std::size_t eq = ln.find('=');
    if (eq == std::string_view::npos) bad_line(line_no, "expected key = value");
    const std::string key(trim(ln.substr(0, eq)));
    if (key.empty()) bad_line(line_no, "empty key");
    apply_key(cfg, section, key, ln.substr(eq + 1), line_no);
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig parse_config_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

std::string serialize_config(const ScenarioConfig& cfg) {
  const int d = cfg.dim();
  auto arr = [&](const double* v, int n) {
    std::string s = "[";
    for (int a = 0; a < n; ++a) s += (a ? ", " : "") + num_str(v[a]);
    return s + "]";
  };

  std::string o;
  o += "name = \"" + cfg.name + "\"\n";
  o += "\n[grid]\n";
  {
    std::string s = "[";
    for (int a = 0; a < d; ++a) s += (a ? ", " : "") + std::to_string(cfg.cells[a]);
    o += "cells = " + s + "]\n";
  }
  o += "extent = " + arr(cfg.extent.data(), d) + "\n";

  o += "\n[time]\n";
  o += "dt = " + num_str(cfg.time.dt) + "\n";
  o += "steps = " + std::to_string(cfg.time.n_steps) + "\n";

  const PhysParams& p = cfg.phys;
  o += "\n[physics]\n";
  o += "alpha = " + num_str(p.alpha) + "\n";
  o += "rho_s = " + num_str(p.rho_s) + "\n";
  o += "a0 = " + num_str(p.a0) + "\n";
  o += "k_c = " + num_str(p.k_c) + "\n";
  o += "k_s0 = " + num_str(p.k_s0) + "\n";
  o += "E_g = " + num_str(p.E_g) + "\n";
  o += "R_g = " + num_str(p.R_g) + "\n";
  o += "T0 = " + num_str(p.T0) + "\n";
  o += "gamma = " + num_str(p.gamma) + "\n";
  o += "mu = " + num_str(p.mu) + "\n";
  if (p.diffusivity[0] == p.diffusivity[1] && p.diffusivity[1] == p.diffusivity[2])
    o += "diffusivity = [" + num_str(p.diffusivity[0]) + "]\n";
  else
    o += "diffusivity = " + arr(p.diffusivity.data(), d) + "\n";
  o += "rho_f = " + num_str(p.rho_f) + "\n";
  o += "theta_s = " + num_str(p.theta_s) + "\n";
  o += "theta_f = " + num_str(p.theta_f) + "\n";
  o += "lambda_s = " + num_str(p.lambda_s) + "\n";
  o += "lambda_f = " + num_str(p.lambda_f) + "\n";

  o += "\n[limits]\n";
  o += "clamp_cmax = " + num_str(cfg.clamp_cmax) + "\n";
  o += "perm_phi_cap = " + num_str(cfg.perm_phi_cap) + "\n";

  o += "\n[initial]\n";
  o += "porosity = " + num_str(cfg.initial_porosity) + "\n";
  o += "permeability = " + num_str(cfg.initial_permeability) + "\n";
  o += "pressure = " + num_str(cfg.initial_pressure) + "\n";
  o += "concentration = " + num_str(cfg.initial_concentration) + "\n";
  o += "temperature = " + num_str(cfg.initial_temperature) + "\n";

  for (const SeedCell& sd : cfg.seeds) {
    o += "\n[[seed]]\n";
    o += "at = " + arr(sd.at.data(), d) + "\n";
    o += "porosity = " + num_str(sd.porosity) + "\n";
    o += "permeability = " + num_str(sd.permeability) + "\n";
  }

  o += "\n[wells]\n";
  o += "injection_x = " + num_str(cfg.wells.injection_x) + "\n";
  o += "injection_rate = " + num_str(cfg.wells.injection_rate) + "\n";
  o += "production_x = " + num_str(cfg.wells.production_x) + "\n";
  o += "production_rate = " + num_str(cfg.wells.production_rate) + "\n";
  o += "injected_conc = " + num_str(cfg.wells.injected_conc) + "\n";

  bool any_fixed = false;
  for (const SideCondition& sc : cfg.boundary.temperature) any_fixed |= sc.fixed;
  if (any_fixed) {
    o += "\n[boundary]\n";
    for (int side = 0; side < 6; ++side)
      if (cfg.boundary.temperature[side].fixed)
        o += std::string("temperature_") + kSideNames[side] + " = " +
             num_str(cfg.boundary.temperature[side].value) + "\n";
  }

  const SolverConfig& sv = cfg.solver;
  o += "\n[solver]\n";
  o += std::string("pressure_method = \"") + method_name(sv.pressure.method) + "\"\n";
  o += "pressure_tol = " + num_str(sv.pressure.tol) + "\n";
  o += "pressure_max_iter = " + std::to_string(sv.pressure.max_iter) + "\n";
  o += std::string("pressure_backward_error = ") +
       (sv.pressure.accept_backward_error ? "true" : "false") + "\n";
  o += std::string("transport_method = \"") + method_name(sv.transport.method) + "\"\n";
  o += "transport_tol = " + num_str(sv.transport.tol) + "\n";
  o += "transport_max_iter = " + std::to_string(sv.transport.max_iter) + "\n";
  o += std::string("transport_backward_error = ") +
       (sv.transport.accept_backward_error ? "true" : "false") + "\n";
  o += std::string("dominance = \"") +
       (sv.dominance == DominancePolicy::Strict ? "strict" : "monitor") + "\"\n";

  o += "\n[output]\n";
  o += "snapshots = " + std::to_string(cfg.output.snapshots) + "\n";
  o += "directory = \"" + cfg.output.directory + "\"\n";
  o += std::string("format = \"") +
       (cfg.output.format == OutputFormat::Csv   ? "csv"
        : cfg.output.format == OutputFormat::Vtk ? "vtk"
                                                 : "both") +
       "\"\n";
  return o;
}

int cell_at_center(const StaggeredGrid& g, Axis a, double coord) {
  g.require_axis(a);
  const double h = g.spacing(a);
  const double s = (coord - g.lo(a)) / h - 0.5;
  const long idx = std::lround(s);
  if (idx < 0 || idx >= g.cells(a) ||
      std::abs(coord - g.center(a, static_cast<int>(idx))) > 1e-9 * h)
    throw ConfigError("coordinate " + num_str(coord) + " does not name a cell center along " +
                      axis_label(a) + " (spacing " + num_str(h) + ")");
  return static_cast<int>(idx);
}

void ScenarioConfig::validate() const {
  const int d = dim();
  for (int a = 0; a < d; ++a) {
    if (cells[a] < 2)
      throw ConfigError("scenario: need at least 2 cells along " +
                        std::string(axis_label(static_cast<Axis>(a))) +
                        " (is the [grid] section present?)");
    if (!(extent[a] > 0.0))
      throw ConfigError("scenario: extent must be positive along " +
                        std::string(axis_label(static_cast<Axis>(a))));
  }
  if (d == 2 && extent[2] != 0.0)
    throw ConfigError("scenario: extent has a z entry but the grid is 2-D");
  time.validate();
  phys.validate();
  if (!(clamp_cmax > 0.0)) throw ConfigError("scenario: clamp_cmax must be positive");
  if (!(perm_phi_cap > 0.0 && perm_phi_cap < 1.0))
    throw ConfigError("scenario: perm_phi_cap must lie in (0,1)");
  if (!(initial_porosity > 0.0 && initial_porosity < 1.0))
    throw ConfigError("scenario: initial porosity must lie in (0,1)");
  if (!(initial_permeability > 0.0))
    throw ConfigError("scenario: initial permeability must be positive");
  if (!(initial_temperature > 0.0))
    throw ConfigError("scenario: initial temperature must be positive");
  if (!(initial_concentration >= 0.0))
    throw ConfigError("scenario: initial concentration must be nonnegative");
  if (!std::isfinite(initial_pressure))
    throw ConfigError("scenario: initial pressure must be finite");

  const StaggeredGrid g = scenario_grid(*this);
  std::vector<std::int64_t> seed_cells;
  for (const SeedCell& sd : seeds) {
    if (!(sd.porosity > 0.0 && sd.porosity < 1.0))
      throw ConfigError("scenario: seed porosity must lie in (0,1)");
    if (!(sd.permeability > 0.0))
      throw ConfigError("scenario: seed permeability must be positive");
    const int i = cell_at_center(g, Axis::X, sd.at[0]);
    const int j = cell_at_center(g, Axis::Y, sd.at[1]);
    const int l = d == 3 ? cell_at_center(g, Axis::Z, sd.at[2]) : 0;
    seed_cells.push_back(g.cell_index(i, j, l));
  }
  std::sort(seed_cells.begin(), seed_cells.end());
  if (std::adjacent_find(seed_cells.begin(), seed_cells.end()) != seed_cells.end())
    throw ConfigError("scenario: two seeds name the same cell");

  const bool wells_off = wells.injection_rate == 0.0 && wells.production_rate == 0.0;
  if (!wells_off) {
    if (!(wells.injection_rate > 0.0 && wells.production_rate < 0.0))
      throw ConfigError("scenario: injection and production rates must have opposite signs");
    cell_at_center(g, Axis::X, wells.injection_x);
    cell_at_center(g, Axis::X, wells.production_x);
  }
  if (!(wells.injected_conc >= 0.0))
    throw ConfigError("scenario: injected concentration must be nonnegative");

  if (d == 2)
    for (int side = 4; side < 6; ++side)
      if (boundary.temperature[side].fixed)
        throw ConfigError("scenario: z-side temperature set on a 2-D grid");

  if (output.snapshots < 1) throw ConfigError("scenario: need at least one snapshot");
  if (output.directory.empty()) throw ConfigError("scenario: output directory must be set");
}

StaggeredGrid scenario_grid(const ScenarioConfig& cfg) {
  std::array<int, 3> n = cfg.cells;
  if (cfg.dim() == 2) n[2] = 1;
  return StaggeredGrid(cfg.dim(), n, {0.0, 0.0, 0.0}, cfg.extent);
}

SimState scenario_state(const ScenarioConfig& cfg) {
  cfg.validate();
  const StaggeredGrid g = scenario_grid(cfg);
  SimState s(g);
  s.pressure.fill(cfg.initial_pressure);
  s.concentration.fill(cfg.initial_concentration);
  s.temperature.fill(cfg.initial_temperature);
  s.porosity.fill(cfg.initial_porosity);
  s.initial_porosity.fill(cfg.initial_porosity);
  s.initial_permeability.fill(cfg.initial_permeability);
  for (const SeedCell& sd : cfg.seeds) {
    const int i = cell_at_center(g, Axis::X, sd.at[0]);
    const int j = cell_at_center(g, Axis::Y, sd.at[1]);
    const int l = g.dim() == 3 ? cell_at_center(g, Axis::Z, sd.at[2]) : 0;
    s.porosity(i, j, l) = sd.porosity;
    s.initial_porosity(i, j, l) = sd.porosity;
    s.initial_permeability(i, j, l) = sd.permeability;
  }
  return s;
}

SourceSpec scenario_sources(const ScenarioConfig& cfg, const StaggeredGrid& g) {
  SourceSpec src;
  src.injected_conc = cfg.wells.injected_conc;
  if (cfg.wells.injection_rate == 0.0 && cfg.wells.production_rate == 0.0) return src;

  const int nz = g.dim() == 3 ? g.cells(Axis::Z) : 1;
  const int inj = cell_at_center(g, Axis::X, cfg.wells.injection_x);
  const int prod = cell_at_center(g, Axis::X, cfg.wells.production_x);
  src.injection_rate = CellField(g);
  src.production_rate = CellField(g);
  for (int l = 0; l < nz; ++l)
    for (int j = 0; j < g.cells(Axis::Y); ++j) {
      src.injection_rate(inj, j, l) = cfg.wells.injection_rate;
      src.production_rate(prod, j, l) = cfg.wells.production_rate;
    }
  return src;
}

StepperOptions scenario_options(const ScenarioConfig& cfg) {
  StepperOptions o;
  o.clamp_cmax = cfg.clamp_cmax;
  o.perm_phi_cap = cfg.perm_phi_cap;
  o.pressure_solver = cfg.solver.pressure;
  o.transport_solver = cfg.solver.transport;
  o.dominance = cfg.solver.dominance;
  o.check_invariants = true;
  return o;
}

double average_porosity(const CellField& psi) {
  const CellField ones(psi.grid(), 1.0);
  return inner_M(psi, ones) / psi.grid().domain_volume();
}

Snapshot take_snapshot(const SimState& s) {
  return Snapshot{s.step,       s.time,          s.porosity, s.pressure,
                  s.concentration, s.temperature, s.velocity};
}

namespace {

void require_writable(const Snapshot& snap) {
  const std::int64_t n = snap.porosity.size();
  if (n == 0) throw InvariantError("snapshot: no cells to write");
  if (snap.pressure.size() != n || snap.concentration.size() != n ||
      snap.temperature.size() != n)
    throw InvariantError("snapshot: field sizes disagree");
  if (!snap.porosity.all_finite() || !snap.pressure.all_finite() ||
      !snap.concentration.all_finite() || !snap.temperature.all_finite())
    throw InvariantError("snapshot: non-finite field value");
  snap.porosity.validate();
}

}  // namespace

std::string snapshot_csv(const Snapshot& snap) {
  require_writable(snap);
  const StaggeredGrid& g = snap.porosity.grid();
  const bool three = g.dim() == 3;
  const int nz = three ? g.cells(Axis::Z) : 1;

  std::string o = three ? "i,j,l,x,y,z,psi,p,c_f,temperature\n" : "i,j,x,y,psi,p,c_f,temperature\n";
  for (int l = 0; l < nz; ++l)
    for (int j = 0; j < g.cells(Axis::Y); ++j)
      for (int i = 0; i < g.cells(Axis::X); ++i) {
        o += std::to_string(i + 1) + ',' + std::to_string(j + 1);
        if (three) o += ',' + std::to_string(l + 1);
        o += ',' + num_str(g.center(Axis::X, i)) + ',' + num_str(g.center(Axis::Y, j));
        if (three) o += ',' + num_str(g.center(Axis::Z, l));
        o += ',' + num_str(snap.porosity(i, j, l));
        o += ',' + num_str(snap.pressure(i, j, l));
        o += ',' + num_str(snap.concentration(i, j, l));
        o += ',' + num_str(snap.temperature(i, j, l));
        o += '\n';
      }
  return o;
}

std::string snapshot_vtk(const Snapshot& snap) {
  require_writable(snap);
  const StaggeredGrid& g = snap.porosity.grid();
  const bool three = g.dim() == 3;
  const int nz = three ? g.cells(Axis::Z) : 1;

  std::string o = "# vtk DataFile Version 3.0\n";
  o += "wormsim snapshot step " + std::to_string(snap.step) + " time " + num_str(snap.time) + "\n";
  o += "ASCII\nDATASET STRUCTURED_POINTS\n";
  o += "DIMENSIONS " + std::to_string(g.cells(Axis::X)) + ' ' + std::to_string(g.cells(Axis::Y)) +
       ' ' + std::to_string(nz) + "\n";
  o += "ORIGIN " + num_str(g.center(Axis::X, 0)) + ' ' + num_str(g.center(Axis::Y, 0)) + ' ' +
       num_str(three ? g.center(Axis::Z, 0) : 0.0) + "\n";
  o += "SPACING " + num_str(g.spacing(Axis::X)) + ' ' + num_str(g.spacing(Axis::Y)) + ' ' +
       num_str(three ? g.spacing(Axis::Z) : 1.0) + "\n";
  o += "POINT_DATA " + std::to_string(g.cell_count()) + "\n";

  const std::array<std::pair<const char*, const CellField*>, 4> fields{
      std::pair{"psi", &snap.porosity}, std::pair{"p", &snap.pressure},
      std::pair{"c_f", &snap.concentration}, std::pair{"temperature", &snap.temperature}};
  for (const auto& [fname, field] : fields) {
    o += std::string("SCALARS ") + fname + " double 1\nLOOKUP_TABLE default\n";
    for (std::int64_t k = 0; k < field->size(); ++k) o += num_str((*field)[k]) + "\n";
  }
  return o;
}

void write_snapshot(const Snapshot& snap, const std::filesystem::path& file, SnapshotFormat fmt) {
  const std::string body = fmt == SnapshotFormat::Csv ? snapshot_csv(snap) : snapshot_vtk(snap);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + file.string() + " for writing");
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw ConfigError("failed while writing " + file.string());
}

std::string resolved_output_dir(const ScenarioConfig& cfg) {
  const char* env = std::getenv("WORMSIM_OUTPUT_DIR");
  if (env != nullptr && *env != '\0') return env;
  return cfg.output.directory;
}

RunResult run_scenario(const ScenarioConfig& cfg, const StepCallback& on_step) {
  cfg.validate();
  const StaggeredGrid g = scenario_grid(cfg);
  SimState s = scenario_state(cfg);
  Stepper stepper(cfg.phys, scenario_sources(cfg, g), cfg.boundary, scenario_options(cfg));

  const std::filesystem::path dir = resolved_output_dir(cfg);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("output directory " + dir.string() + ": " + ec.message());

  RunResult out{std::move(s), {}, {}, {}};
  SimState& state = out.state;
  out.average_porosity.push_back(average_porosity(state.porosity));

  std::string series = "step,time,avg_porosity\n";
  series += "0,0," + num_str(out.average_porosity.front()) + "\n";

  const std::int64_t every =
      std::max<std::int64_t>(1, cfg.time.n_steps / std::max<std::int64_t>(1, cfg.output.snapshots));

  auto emit = [&](const Snapshot& snap) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "_step%04lld", static_cast<long long>(snap.step));
    if (cfg.output.format != OutputFormat::Vtk) {
      const auto file = dir / (cfg.name + tag + ".csv");
      write_snapshot(snap, file, SnapshotFormat::Csv);
      out.snapshot_files.push_back(file.string());
    }
    if (cfg.output.format != OutputFormat::Csv) {
      const auto file = dir / (cfg.name + tag + ".vtk");
      write_snapshot(snap, file, SnapshotFormat::Vtk);
      out.snapshot_files.push_back(file.string());
    }
  };

  for (std::int64_t n = 1; n <= cfg.time.n_steps; ++n) {
    stepper.advance(state, cfg.time.dt);
    const double avg = average_porosity(state.porosity);
    if (avg < out.average_porosity.back())
      throw InvariantError("scenario: average porosity decreased at step " + std::to_string(n));
    out.average_porosity.push_back(avg);
    series += std::to_string(state.step) + ',' + num_str(state.time) + ',' + num_str(avg) + "\n";
    if (on_step) on_step(state, stepper.diagnostics());
    if (n % every == 0 || n == cfg.time.n_steps) emit(take_snapshot(state));
  }

  const auto series_path = dir / (cfg.name + "_series.csv");
  std::ofstream sf(series_path, std::ios::binary);
  if (!sf) throw ConfigError("cannot open " + series_path.string() + " for writing");
  sf.write(series.data(), static_cast<std::streamsize>(series.size()));
  if (!sf) throw ConfigError("failed while writing " + series_path.string());
  out.series_file = series_path.string();
  return out;
}

std::vector<std::string> builtin_scenario_names() { return {"example3", "example4", "example5"}; }

namespace {

ScenarioConfig dissolution_base() {
  ScenarioConfig c;
  PhysParams& p = c.phys;
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

  c.clamp_cmax = 1e3;  // clamp at the injected concentration
  c.perm_phi_cap = 0.95;
  c.initial_porosity = 0.2;
  c.initial_permeability = 1e-8;
  c.initial_pressure = 1.52e5;
  c.initial_concentration = 0.0;
  c.initial_temperature = 298.0;
  c.wells.injected_conc = 1e3;

  c.solver.pressure.tol = 1e-8;
  c.solver.pressure.accept_backward_error = true;
  c.solver.transport.tol = 1e-8;
  c.solver.transport.accept_backward_error = true;
  c.solver.dominance = DominancePolicy::Monitor;

  c.output.snapshots = 10;
  c.output.format = OutputFormat::Both;
  return c;
}

}  // namespace

ScenarioConfig builtin_scenario(std::string_view name) {
  if (name == "example3") {
    ScenarioConfig c = dissolution_base();
    c.name = "example3";
    c.cells = {80, 80, 0};
    c.extent = {0.2, 0.2, 0.0};
    c.time = {1e5, 100};
    c.seeds = {{{1.25e-3, 1.0125e-1, 0.0}, 0.5, 1e-7},
               {{1.25e-3, 5.125e-2, 0.0}, 0.6, 1e-6}};
    c.wells.injection_x = 1.25e-3;
    c.wells.injection_rate = 1e-4;
    c.wells.production_x = 1.9875e-1;
    c.wells.production_rate = -1e-4;
    c.solver.pressure.method = SolveMethod::BandLU;
    c.output.directory = "out/example3";
    c.validate();
    return c;
  }
  if (name == "example4") {
    ScenarioConfig c = dissolution_base();
    c.name = "example4";
    c.cells = {80, 80, 0};
    c.extent = {0.2, 0.2, 0.0};
    c.time = {1e4, 100};
    c.seeds = {{{1.25e-3, 1.0125e-1, 0.0}, 0.5, 1e-7},
               {{1.25e-3, 5.125e-2, 0.0}, 0.6, 1e-6}};
    c.wells.injection_x = 1.25e-3;
    c.wells.injection_rate = 5e-4;
    c.wells.production_x = 1.9875e-1;
    c.wells.production_rate = -5e-4;
    c.boundary.side(Side::XLo) = {true, 298.0};
    c.solver.pressure.method = SolveMethod::BandLU;
    c.output.directory = "out/example4";
    c.validate();
    return c;
  }
  if (name == "example5") {
    ScenarioConfig c = dissolution_base();
    c.name = "example5";
    c.cells = {40, 40, 40};
    c.extent = {0.2, 0.2, 0.2};
    c.time = {1e4, 100};
    c.seeds = {{{2.5e-3, 1.025e-1, 1.025e-1}, 0.5, 1e-7},
               {{2.5e-3, 5.25e-2, 5.25e-2}, 0.6, 1e-6}};
    c.wells.injection_x = 2.5e-3;
    c.wells.injection_rate = 1e-4;
    c.wells.production_x = 1.975e-1;
    c.wells.production_rate = -1e-4;
    c.solver.pressure.method = SolveMethod::CG;
    c.output.directory = "out/example5";
    c.validate();
    return c;
  }
  throw ConfigError("unknown scenario '" + std::string(name) +
                    "'; built in: example3, example4, example5");
}

}  // namespace wormsim
