#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "wormsim/banded.hpp"
#include "wormsim/constitutive.hpp"
#include "wormsim/grid.hpp"
#include "wormsim/scenario.hpp"
#include "wormsim/stepper.hpp"

using namespace wormsim;

namespace {

// Variable-coefficient Laplacian plus a mass term, the shape every stage
// assembles. Symmetric, strictly dominant.
BandedSystem sample_system(const StaggeredGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(0.5, 1.5);
  CellField kappa(g);
  for (std::int64_t k = 0; k < kappa.size(); ++k) kappa[k] = coef(rng);
  std::vector<double> rhs(static_cast<std::size_t>(g.cell_count()));
  for (double& v : rhs) v = coef(rng);

  const int nz = g.dim() == 3 ? g.cells(Axis::Z) : 1;
  auto row_of = [&](int i, int j, int l) {
    StencilRow row;
    row.diag = 1.0;
    auto face = [&](Band b, int ni, int nj, int nl, double h) {
      const double w = 0.5 * (kappa(i, j, l) + kappa(ni, nj, nl)) / (h * h);
      row[b] = -w;
      row.diag += w;
    };
    if (i > 0) face(Band::XLo, i - 1, j, l, g.spacing(Axis::X));
    if (i + 1 < g.cells(Axis::X)) face(Band::XHi, i + 1, j, l, g.spacing(Axis::X));
    if (j > 0) face(Band::YLo, i, j - 1, l, g.spacing(Axis::Y));
    if (j + 1 < g.cells(Axis::Y)) face(Band::YHi, i, j + 1, l, g.spacing(Axis::Y));
    if (g.dim() == 3 && l > 0) face(Band::ZLo, i, j, l - 1, g.spacing(Axis::Z));
    if (g.dim() == 3 && l + 1 < nz) face(Band::ZHi, i, j, l + 1, g.spacing(Axis::Z));
    return row;
  };
  return assemble(g, row_of, rhs, true);
}

void BM_Matvec(benchmark::State& state, int dim) {
  const int n = static_cast<int>(state.range(0));
  const StaggeredGrid g = dim == 2 ? StaggeredGrid::square(n) : StaggeredGrid::cube(n);
  const BandedSystem sys = sample_system(g, 7);
  std::vector<double> x(static_cast<std::size_t>(sys.size()), 1.0);
  std::vector<double> y(x.size());
  for (auto _ : state) {
    sys.matvec(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * sys.size());
}
BENCHMARK_CAPTURE(BM_Matvec, 2d, 2)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(BM_Matvec, 3d, 3)->Arg(16)->Arg(32)->Arg(48);

void BM_SolveCG(benchmark::State& state, int dim) {
  const int n = static_cast<int>(state.range(0));
  const StaggeredGrid g = dim == 2 ? StaggeredGrid::square(n) : StaggeredGrid::cube(n);
  const BandedSystem sys = sample_system(g, 11);
  SolverOptions opts;
  opts.tol = 1e-10;
  opts.method = SolveMethod::CG;
  for (auto _ : state) {
    std::vector<double> x = solve(sys, opts);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK_CAPTURE(BM_SolveCG, 2d, 2)->Arg(64)->Arg(128);
BENCHMARK_CAPTURE(BM_SolveCG, 3d, 3)->Arg(16)->Arg(32);

void BM_SolveBandLU(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const BandedSystem sys = sample_system(StaggeredGrid::square(n), 13);
  SolverOptions opts;
  opts.method = SolveMethod::BandLU;
  for (auto _ : state) {
    std::vector<double> x = solve(sys, opts);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_SolveBandLU)->Arg(32)->Arg(64)->Arg(128);

void BM_Advance(benchmark::State& state, const char* preset) {
  ScenarioConfig cfg = builtin_scenario(preset);
  SimState s = scenario_state(cfg);
  StepperOptions opts = scenario_options(cfg);
  Stepper st(cfg.phys, scenario_sources(cfg, s.grid), {}, opts);
  for (auto _ : state) {
    st.advance(s, cfg.time.dt);
    benchmark::DoNotOptimize(s.porosity.values().data());
  }
  state.SetItemsProcessed(state.iterations() * s.grid.cell_count());
}
BENCHMARK_CAPTURE(BM_Advance, example3_80x80, "example3")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Advance, example5_40cubed, "example5")
    ->Unit(benchmark::kMillisecond)
    ->Iterations(5);

void BM_Closures(benchmark::State& state) {
  const std::int64_t n = state.range(0);
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
  p.theta_s = 2e2;
  p.theta_f = 4.184e3;
  p.lambda_s = 5.526;
  p.lambda_f = 0.58;

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> phi_d(0.2, 0.9), c_d(0.0, 1e3), t_d(290.0, 360.0);
  std::vector<double> phi(n), conc(n), temp(n), out(n);
  for (std::int64_t k = 0; k < n; ++k) {
    phi[k] = phi_d(rng);
    conc[k] = c_d(rng);
    temp[k] = t_d(rng);
  }
  for (auto _ : state) {
    for (std::int64_t k = 0; k < n; ++k) {
      const double kap = permeability(phi[k], 0.2, 1e-8);
      const double av = interfacial_area(phi[k], 0.2, 0.5, kap, 1e-8);
      out[k] = av * reaction_rate(conc[k], temp[k], p);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Closures)->Arg(1 << 14)->Arg(1 << 17);

void BM_Divergence(benchmark::State& state, int dim) {
  const int n = static_cast<int>(state.range(0));
  const StaggeredGrid g = dim == 2 ? StaggeredGrid::square(n) : StaggeredGrid::cube(n);
  FaceField w(g, 1.0);
  for (auto _ : state) {
    CellField d = divergence(w);
    benchmark::DoNotOptimize(d.values().data());
  }
  state.SetItemsProcessed(state.iterations() * g.cell_count());
}
BENCHMARK_CAPTURE(BM_Divergence, 2d, 2)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(BM_Divergence, 3d, 3)->Arg(32)->Arg(48);

}  // namespace

BENCHMARK_MAIN();
