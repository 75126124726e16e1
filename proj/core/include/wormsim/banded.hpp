#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "wormsim/grid.hpp"

namespace wormsim {

// One band per stencil neighbor: 5 bands in 2-D, 7 in 3-D (plus diagonal).
enum class Band : int { XLo = 0, XHi = 1, YLo = 2, YHi = 3, ZLo = 4, ZHi = 5 };

struct StencilRow {
  double diag = 0.0;
  std::array<double, 6> off{};

  double& operator[](Band b) { return off[static_cast<int>(b)]; }
  double operator[](Band b) const { return off[static_cast<int>(b)]; }
};

// Strict diagonal dominance is a property of every system the scheme
// assembles on an admissible state. Strict policy throws on violation;
// Monitor records it and lets the run continue (dissolution runs can lose
// dominance in the convection terms once a channel saturates).
enum class DominancePolicy { Strict, Monitor };

struct DominanceReport {
  std::int64_t violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::int64_t worst_row = -1;
};

class BandedSystem {
 public:
  BandedSystem() = default;

  const StaggeredGrid& grid() const { return grid_; }
  std::int64_t size() const { return n_; }
  bool symmetric() const { return symmetric_; }
  const DominanceReport& dominance() const { return dominance_; }

  std::span<const double> rhs() const { return rhs_; }
  std::span<const double> diag() const { return diag_; }
  std::span<const double> band(Band b) const { return off_[static_cast<int>(b)]; }

  void matvec(std::span<const double> x, std::span<double> y) const;
  double residual_norm(std::span<const double> x) const;  // ||b - A x||_2
  double rhs_norm() const;
  double inf_norm() const;  // max absolute row sum

  friend BandedSystem assemble(const StaggeredGrid& grid,
                               const std::function<StencilRow(int, int, int)>& row_of,
                               std::span<const double> rhs, bool symmetric,
                               DominancePolicy policy);

 private:
  StaggeredGrid grid_;
  std::int64_t n_ = 0;
  std::vector<double> diag_;
  std::array<std::vector<double>, 6> off_;
  std::vector<double> rhs_;
  bool symmetric_ = false;
  DominanceReport dominance_;
};

// Builds the system row by row. Neighbor coefficients that would reach across
// the domain boundary must be exactly zero; assemble throws InvariantError
// otherwise, and applies the dominance policy to |diag| > sum|off|.
BandedSystem assemble(const StaggeredGrid& grid,
                      const std::function<StencilRow(int, int, int)>& row_of,
                      std::span<const double> rhs, bool symmetric,
                      DominancePolicy policy = DominancePolicy::Strict);

enum class SolveMethod { Auto, CG, BiCGStab, BandLU, DenseLU };
enum class ConvergenceCriterion { Relative, BackwardError };

struct SolverOptions {
  double tol = 1e-10;           // on ||b - Ax|| / ||b||
  std::int64_t max_iter = 0;    // 0 means 10 * n
  SolveMethod method = SolveMethod::Auto;
  // Accept ||r|| <= tol * (||A||_inf ||x|| + ||b||) when the relative
  // criterion is out of reach for the conditioning at hand.
  bool accept_backward_error = false;

  bool operator==(const SolverOptions&) const = default;
};

struct SolveReport {
  SolveMethod method = SolveMethod::Auto;
  ConvergenceCriterion criterion = ConvergenceCriterion::Relative;
  std::int64_t iterations = 0;
  double rel_residual = 0.0;
  double backward_error = 0.0;
  bool used_direct_fallback = false;
};

// Solves A x = rhs. Auto picks Jacobi-preconditioned CG for symmetric systems
// and Jacobi-preconditioned BiCGStab otherwise, warm-started from x0 when
// given; if the Krylov iteration cannot meet the criterion and the bandwidth
// is small enough, a banded LU factorization finishes the job. Throws
// SolverError when no path satisfies the requested criterion.
std::vector<double> solve(const BandedSystem& sys, SolveReport& report,
                          const SolverOptions& opts = {}, std::span<const double> x0 = {});
std::vector<double> solve(const BandedSystem& sys, const SolverOptions& opts = {},
                          std::span<const double> x0 = {});

// Dense direct elimination with partial pivoting, restricted to n <= 4096.
// Serves as the reference oracle for the iterative paths and for tiny grids.
std::vector<double> solve_dense(const BandedSystem& sys);

}  // namespace wormsim
