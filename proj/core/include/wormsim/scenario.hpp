#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "wormsim/banded.hpp"
#include "wormsim/constitutive.hpp"
#include "wormsim/grid.hpp"
#include "wormsim/stepper.hpp"

namespace wormsim {

// One cell whose initial porosity and permeability differ from the
// background medium. The cell is named by the physical coordinates of its
// center; validation rejects coordinates that do not land on one.
struct SeedCell {
  std::array<double, 3> at{0.0, 0.0, 0.0};  // z ignored in 2-D
  double porosity = 0.0;
  double permeability = 0.0;

  bool operator==(const SeedCell&) const = default;
};

// Injection and production columns: every cell whose x-center matches the
// given coordinate carries the rate, uniformly in y (and z). Rates are
// volumetric source densities; injection must be positive and production
// negative (or both zero for a sealed box).
struct WellSpec {
  double injection_x = 0.0;
  double injection_rate = 0.0;
  double production_x = 0.0;
  double production_rate = 0.0;
  double injected_conc = 0.0;

  bool operator==(const WellSpec&) const = default;
};

enum class OutputFormat { Csv, Vtk, Both };

struct OutputSpec {
  std::int64_t snapshots = 10;  // evenly spaced over the run; final step always written
  std::string directory = "out";
  OutputFormat format = OutputFormat::Both;

  bool operator==(const OutputSpec&) const = default;
};

struct SolverConfig {
  SolverOptions pressure{};
  SolverOptions transport{};
  DominancePolicy dominance = DominancePolicy::Strict;

  bool operator==(const SolverConfig&) const = default;
};

// Complete description of one dissolution run: grid, schedule, physics,
// medium, wells, boundaries, solver selection and output policy. The box
// always has its lower corner at the origin; cells[2] == 0 selects 2-D.
struct ScenarioConfig {
  std::string name = "scenario";
  std::array<int, 3> cells{0, 0, 0};
  std::array<double, 3> extent{0.0, 0.0, 0.0};
  TimeControl time{};
  PhysParams phys{};
  double clamp_cmax = 1.0;
  double perm_phi_cap = 1.0 - 1e-9;
  double initial_porosity = 0.0;
  double initial_permeability = 0.0;
  double initial_pressure = 0.0;
  double initial_concentration = 0.0;
  double initial_temperature = 0.0;
  std::vector<SeedCell> seeds;
  WellSpec wells{};
  BoundarySpec boundary{};
  SolverConfig solver{};
  OutputSpec output{};

  int dim() const { return cells[2] > 0 ? 3 : 2; }

  // Full cross-field validation: grid and extent sized for the dimension,
  // physics positive, initial fields admissible, seed and well coordinates
  // on cell centers, rates of opposite sign. Throws ConfigError.
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

// Built-in presets for the three stock dissolution runs. Names are
// "example3" (2-D, slow injection), "example4" (2-D, fast injection with the
// inflow wall held at the injection temperature) and "example5" (3-D).
// Unknown names throw ConfigError.
std::vector<std::string> builtin_scenario_names();
ScenarioConfig builtin_scenario(std::string_view name);

// Structured key-value text (TOML-like sections, `key = value` lines,
// repeated [[seed]] blocks). parse_config rejects unknown sections and keys
// with the offending line number and re-validates the result;
// serialize_config emits text that parses back to an equal config.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig parse_config_file(const std::filesystem::path& file);
std::string serialize_config(const ScenarioConfig& cfg);

// Maps a physical coordinate to the unique cell index (zero-based) whose
// center it names along the axis; throws ConfigError when the coordinate
// lies off-center or outside the box.
int cell_at_center(const StaggeredGrid& g, Axis a, double coord);

// Assembly helpers, each consuming only the validated config.
StaggeredGrid scenario_grid(const ScenarioConfig& cfg);
SimState scenario_state(const ScenarioConfig& cfg);
SourceSpec scenario_sources(const ScenarioConfig& cfg, const StaggeredGrid& g);
StepperOptions scenario_options(const ScenarioConfig& cfg);

// Volume-weighted mean porosity, inner_M(psi, 1) / |domain|.
double average_porosity(const CellField& psi);

// Cell fields and the Darcy velocity frozen at one output time.
struct Snapshot {
  std::int64_t step = 0;
  double time = 0.0;
  CellField porosity;
  CellField pressure;
  CellField concentration;
  CellField temperature;
  FaceField velocity;
};

Snapshot take_snapshot(const SimState& s);

enum class SnapshotFormat { Csv, Vtk };

// Serialized snapshot text. CSV: header i,j[,l],x,y[,z],psi,p,c_f,temperature
// with one row per cell in linear order (x fastest) and 1-based indices.
// VTK: legacy STRUCTURED_POINTS ASCII, dimensions = cell counts, origin =
// first cell center, one scalar array per cell field in the CSV's column
// order. Both print doubles with %.17g, so identical fields serialize to
// identical bytes. Throws InvariantError on empty or non-finite snapshots.
std::string snapshot_csv(const Snapshot& snap);
std::string snapshot_vtk(const Snapshot& snap);
void write_snapshot(const Snapshot& snap, const std::filesystem::path& file, SnapshotFormat fmt);

// Output directory after applying the WORMSIM_OUTPUT_DIR environment
// override (set and nonempty beats the config value).
std::string resolved_output_dir(const ScenarioConfig& cfg);

struct RunResult {
  SimState state;                        // fields after the final step
  std::vector<double> average_porosity;  // one entry per step, initial first
  std::vector<std::string> snapshot_files;
  std::string series_file;
};

using StepCallback = std::function<void(const SimState&, const StepDiagnostics&)>;

// Runs the configured scenario start to finish: builds the grid, medium and
// stepper, advances time.n_steps steps, asserts the average porosity never
// decreases, writes snapshots at the configured cadence plus the final step,
// and writes a per-step diagnostics series (step, time, average porosity).
// on_step, when set, fires after every committed step.
RunResult run_scenario(const ScenarioConfig& cfg, const StepCallback& on_step = {});

}  // namespace wormsim
