#include "wormsim/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wormsim/constitutive.hpp"
#include "wormsim/grid.hpp"
#include "wormsim/mms.hpp"
#include "wormsim/residual_oracle.hpp"

namespace wormsim {

namespace {

void randomize_cells(CellField& f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::int64_t k = 0; k < f.size(); ++k) f[k] = dist(rng);
}

void randomize_interior_faces(FaceField& w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const StaggeredGrid& g = w.grid();
  for (int a = 0; a < g.dim(); ++a) {
    const Axis ax = static_cast<Axis>(a);
    const int nx = g.cells(Axis::X) + (a == 0 ? 1 : 0);
    const int ny = g.cells(Axis::Y) + (a == 1 ? 1 : 0);
    const int nz = (g.dim() == 3 ? g.cells(Axis::Z) : 1) + (a == 2 ? 1 : 0);
    for (int l = 0; l < nz; ++l)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const int m = a == 0 ? i : a == 1 ? j : l;
          const int last = a == 0 ? nx - 1 : a == 1 ? ny - 1 : nz - 1;
          w.at(ax, i, j, l) = (m == 0 || m == last) ? 0.0 : dist(rng);
        }
  }
}

SelfCheck adjoint_identity(int dim) {
  SelfCheck chk{dim == 2 ? "adjoint identity, 2-D" : "adjoint identity, 3-D", 0.0, 1e-12};
  const StaggeredGrid g = dim == 2 ? StaggeredGrid(2, {6, 4, 1}, {0, 0, 0}, {1.0, 0.8, 0})
                                   : StaggeredGrid(3, {5, 4, 3}, {0, 0, 0}, {1.0, 0.8, 0.9});
  std::mt19937_64 rng(dim == 2 ? 77 : 78);
  for (int trial = 0; trial < 100; ++trial) {
    CellField q(g);
    randomize_cells(q, rng);
    FaceField w(g);
    randomize_interior_faces(w, rng);
    for (int a = 0; a < dim; ++a) {
      const Axis ax = static_cast<Axis>(a);
      const double lhs = inner_M(q, D_cell(w, ax));
      const double rhs = -inner_face(d_face(q, ax), w, ax);
      const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
      chk.worst = std::max(chk.worst, std::abs(lhs - rhs) / scale);
    }
  }
  return chk;
}

SelfCheck interfacial_area_forms() {
  SelfCheck chk{"interfacial area, two forms", 0.0, 1e-12};
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> dist(0.05, 0.95);
  for (int trial = 0; trial < 10000; ++trial) {
    const double phi = dist(rng);
    const double phi0 = dist(rng);
    const double K0 = 1e-8;
    const double K = permeability(phi, phi0, K0);
    const double via_model = interfacial_area(phi, phi0, 0.5, K, K0);
    const double closed = interfacial_area(phi, phi0, 0.5);
    chk.worst = std::max(chk.worst,
                         std::abs(via_model - closed) / std::max(1e-30, std::abs(closed)));
  }
  return chk;
}

SelfCheck reaction_rate_forms() {
  SelfCheck chk{"reaction rate, two forms", 0.0, 1e-12};
  PhysParams p;
  p.alpha = 5e-2;
  p.rho_s = 2.71e3;
  p.a0 = 0.5;
  p.k_c = 1e-3;
  p.k_s0 = 2e-3;
  p.E_g = 5.02416e4;
  p.R_g = 8.314;
  p.T0 = 298.0;
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> conc(0.0, 1.2e3);
  std::uniform_real_distribution<double> temp(280.0, 400.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const double c = conc(rng);
    const double T = temp(rng);
    const double factored = reaction_rate(c, T, p);
    const double ks = surface_rate(T, p);
    const double deficit = p.k_c * (c - interface_conc(c, ks, p.k_c));
    chk.worst = std::max(chk.worst,
                         std::abs(factored - deficit) / std::max(1.0, std::abs(deficit)));
  }
  return chk;
}

SelfCheck source_residual(int dim) {
  SelfCheck chk{dim == 2 ? "manufactured sources, 2-D" : "manufactured sources, 3-D", 0.0, 1e-6};
  if (dim == 2) {
    const auto mc = mms::example1_case();
    chk.worst = oracle::scan_residuals(*mc, 32, {0.125, 0.5, 0.875}).worst();
  } else {
    const auto mc = mms::example2_case();
    chk.worst = oracle::scan_residuals(*mc, 10, {0.3, 0.9}).worst();
  }
  return chk;
}

}  // namespace

std::vector<SelfCheck> run_self_checks() {
  std::vector<SelfCheck> out;
  out.push_back(adjoint_identity(2));
  out.push_back(adjoint_identity(3));
  out.push_back(interfacial_area_forms());
  out.push_back(reaction_rate_forms());
  out.push_back(source_residual(2));
  out.push_back(source_residual(3));
  return out;
}

}  // namespace wormsim
