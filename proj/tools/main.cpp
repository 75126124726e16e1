#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <wormsim/errors.hpp>
#include <wormsim/mms.hpp>
#include <wormsim/scenario.hpp>
#include <wormsim/selfcheck.hpp>

namespace {

using namespace wormsim;

ScenarioConfig load_scenario(const std::string& target) {
  const auto names = builtin_scenario_names();
  if (std::find(names.begin(), names.end(), target) != names.end())
    return builtin_scenario(target);
  return parse_config_file(target);
}

int cmd_run(const std::string& target, const std::string& output_dir, const std::string& format) {
  ScenarioConfig cfg = load_scenario(target);
  if (!output_dir.empty()) {
    cfg.output.directory = output_dir;
    // An explicit flag beats the WORMSIM_OUTPUT_DIR environment override.
    ::unsetenv("WORMSIM_OUTPUT_DIR");
  }
  if (format == "csv") cfg.output.format = OutputFormat::Csv;
  else if (format == "vtk") cfg.output.format = OutputFormat::Vtk;
  else if (format == "both") cfg.output.format = OutputFormat::Both;

  const std::int64_t report_every = std::max<std::int64_t>(1, cfg.time.n_steps / 10);
  const RunResult res = run_scenario(cfg, [&](const SimState& s, const StepDiagnostics&) {
    if (s.step % report_every == 0 || s.step == cfg.time.n_steps)
      std::fprintf(stderr, "  step %lld/%lld  t = %.6g  avg porosity %.10f\n",
                   static_cast<long long>(s.step), static_cast<long long>(cfg.time.n_steps),
                   s.time, average_porosity(s.porosity));
  });

  std::printf("%s: %lld steps to t = %.6g on %d", cfg.name.c_str(),
              static_cast<long long>(res.state.step), res.state.time, cfg.cells[0]);
  for (int a = 1; a < cfg.dim(); ++a) std::printf("x%d", cfg.cells[a]);
  std::printf(" cells\n");
  std::printf("average porosity %.10f -> %.10f\n", res.average_porosity.front(),
              res.average_porosity.back());
  std::printf("wrote %zu snapshot files and %s\n", res.snapshot_files.size(),
              res.series_file.c_str());
  return 0;
}

int cmd_converge(const std::string& which, const std::vector<int>& meshes, bool as_csv) {
  const auto mc = which == "example1" ? mms::example1_case() : mms::example2_case();
  const auto report = mms::run_convergence_study(*mc, meshes, [](const mms::MeshResult& m) {
    std::fprintf(stderr, "  mesh %d done (h = %.6g)\n", m.cells, m.h);
  });
  std::fputs((as_csv ? report.csv() : report.table()).c_str(), stdout);
  return 0;
}

int cmd_check() {
  bool ok = true;
  for (const SelfCheck& c : run_self_checks()) {
    std::printf("%s  %-28s worst %.3e  limit %.0e\n", c.pass() ? "PASS" : "FAIL", c.name.c_str(),
                c.worst, c.limit);
    ok = ok && c.pass();
  }
  return ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-difference simulator for acid dissolution in porous rock"};
  app.require_subcommand(1);

  std::string target;
  std::string output_dir;
  std::string format;
  CLI::App* run = app.add_subcommand("run", "simulate a dissolution scenario");
  run->add_option("scenario", target, "preset (example3, example4, example5) or config file")
      ->required();
  run->add_option("--output-dir", output_dir,
                  "write outputs here instead of the configured directory");
  run->add_option("--format", format, "snapshot format")
      ->check(CLI::IsMember({"csv", "vtk", "both"}));

  std::string which;
  std::vector<int> meshes{10, 20, 40};
  bool as_csv = false;
  CLI::App* converge = app.add_subcommand("converge", "manufactured-solution convergence study");
  converge->add_option("case", which, "example1 (2-D) or example2 (3-D)")
      ->required()
      ->check(CLI::IsMember({"example1", "example2"}));
  converge->add_option("--meshes", meshes, "cells per axis, halving h each entry")
      ->delimiter(',');
  converge->add_flag("--csv", as_csv, "emit CSV instead of the aligned table");

  CLI::App* check = app.add_subcommand("check", "run the built-in consistency checks");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(target, output_dir, format);
    if (converge->parsed()) return cmd_converge(which, meshes, as_csv);
    if (check->parsed()) return cmd_check();
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const InvariantError& e) {
    std::fprintf(stderr, "invariant violated: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
