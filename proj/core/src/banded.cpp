#include "wormsim/banded.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "wormsim/errors.hpp"

extern "C" void dgbsv_(const int* n, const int* kl, const int* ku, const int* nrhs, double* ab,
                       const int* ldab, int* ipiv, double* b, const int* ldb, int* info);

namespace wormsim {

namespace {

constexpr std::int64_t kDenseLimit = 4096;
// Feasibility gate for the banded factorization: (3*bw+1)*n doubles.
constexpr std::int64_t kBandLuMaxDoubles = 40'000'000;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double nrm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct GridShape {
  int nx, ny, nz;
  std::int64_t sy, sz;
};

GridShape shape_of(const StaggeredGrid& g) {
  GridShape s;
  s.nx = g.cells(Axis::X);
  s.ny = g.cells(Axis::Y);
  s.nz = g.dim() == 3 ? g.cells(Axis::Z) : 1;
  s.sy = s.nx;
  s.sz = static_cast<std::int64_t>(s.nx) * s.ny;
  return s;
}

std::string row_coords(const StaggeredGrid& g, std::int64_t id) {
  const GridShape s = shape_of(g);
  const int i = static_cast<int>(id % s.nx);
  const int j = static_cast<int>((id / s.sy) % s.ny);
  const int l = static_cast<int>(id / s.sz);
  return "(" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(l) + ")";
}

}  // namespace

void BandedSystem::matvec(std::span<const double> x, std::span<double> y) const {
  const GridShape s = shape_of(grid_);
  const bool has_z = grid_.dim() == 3;
  std::int64_t id = 0;
  for (int l = 0; l < s.nz; ++l)
    for (int j = 0; j < s.ny; ++j)
      for (int i = 0; i < s.nx; ++i, ++id) {
        double v = diag_[id] * x[id];
        if (i > 0) v += off_[0][id] * x[id - 1];
        if (i < s.nx - 1) v += off_[1][id] * x[id + 1];
        if (j > 0) v += off_[2][id] * x[id - s.sy];
        if (j < s.ny - 1) v += off_[3][id] * x[id + s.sy];
        if (has_z) {
          if (l > 0) v += off_[4][id] * x[id - s.sz];
          if (l < s.nz - 1) v += off_[5][id] * x[id + s.sz];
        }
        y[id] = v;
      }
}

double BandedSystem::residual_norm(std::span<const double> x) const {
  std::vector<double> ax(static_cast<std::size_t>(n_));
  matvec(x, ax);
  double s = 0.0;
  for (std::int64_t k = 0; k < n_; ++k) {
    const double r = rhs_[k] - ax[k];
    s += r * r;
  }
  return std::sqrt(s);
}

double BandedSystem::rhs_norm() const { return nrm2(rhs_); }

double BandedSystem::inf_norm() const {
  double worst = 0.0;
  for (std::int64_t k = 0; k < n_; ++k) {
    double row = std::abs(diag_[k]);
    for (const auto& band : off_)
      if (!band.empty()) row += std::abs(band[k]);
    worst = std::max(worst, row);
  }
  return worst;
}

BandedSystem assemble(const StaggeredGrid& grid,
                      const std::function<StencilRow(int, int, int)>& row_of,
                      std::span<const double> rhs, bool symmetric, DominancePolicy policy) {
  BandedSystem sys;
  sys.grid_ = grid;
  sys.n_ = grid.cell_count();
  if (static_cast<std::int64_t>(rhs.size()) != sys.n_)
    throw std::invalid_argument("assemble: rhs size does not match the grid");
  sys.rhs_.assign(rhs.begin(), rhs.end());
  sys.diag_.resize(static_cast<std::size_t>(sys.n_));
  const int nbands = 2 * grid.dim();
  for (int b = 0; b < 6; ++b)
    sys.off_[b].assign(b < nbands ? static_cast<std::size_t>(sys.n_) : 0, 0.0);
  sys.symmetric_ = symmetric;

  const GridShape s = shape_of(grid);
  std::int64_t id = 0;
  for (int l = 0; l < s.nz; ++l)
    for (int j = 0; j < s.ny; ++j)
      for (int i = 0; i < s.nx; ++i, ++id) {
        const StencilRow row = row_of(i, j, l);
        const bool crosses[6] = {i == 0,          i == s.nx - 1, j == 0,
                                 j == s.ny - 1,   l == 0,        l == s.nz - 1};
        double off_sum = 0.0;
        for (int b = 0; b < nbands; ++b) {
          const double v = row.off[b];
          if (crosses[b] && v != 0.0)
            throw InvariantError("assemble: nonzero coefficient across the domain boundary at row " +
                                 row_coords(grid, id));
          sys.off_[b][id] = v;
          off_sum += std::abs(v);
        }
        sys.diag_[id] = row.diag;
        const double margin = std::abs(row.diag) - off_sum;
        if (margin < sys.dominance_.worst_margin) {
          sys.dominance_.worst_margin = margin;
          if (margin <= 0.0) sys.dominance_.worst_row = id;
        }
        if (margin <= 0.0) {
          ++sys.dominance_.violations;
          if (policy == DominancePolicy::Strict)
            throw InvariantError("assemble: diagonal dominance violated at row " +
                                 row_coords(grid, id) + ": |diag| = " + std::to_string(std::abs(row.diag)) +
                                 ", off-diagonal sum = " + std::to_string(off_sum));
        }
      }

  if (symmetric) {
    // The transpose pairs live one stride apart in the opposite band.
    const std::int64_t strides[3] = {1, s.sy, s.sz};
    for (int a = 0; a < grid.dim(); ++a) {
      const auto& hi = sys.off_[2 * a + 1];
      const auto& lo = sys.off_[2 * a];
      for (std::int64_t k = 0; k + strides[a] < sys.n_; ++k) {
        const double x = hi[k], y = lo[k + strides[a]];
        if (std::abs(x - y) > 1e-12 * std::max({1.0, std::abs(x), std::abs(y)}))
          throw std::invalid_argument("assemble: system declared symmetric but is not at row " +
                                      row_coords(grid, k));
      }
    }
  }
  return sys;
}

namespace {

struct IterOutcome {
  std::int64_t iterations = 0;
  bool breakdown = false;
};

std::vector<double> inverse_diag(const BandedSystem& sys) {
  std::vector<double> inv(static_cast<std::size_t>(sys.size()));
  const auto d = sys.diag();
  for (std::int64_t k = 0; k < sys.size(); ++k) {
    if (d[k] == 0.0)
      throw SolverError("solve: zero diagonal at row " + std::to_string(k));
    inv[k] = 1.0 / d[k];
  }
  return inv;
}

// Jacobi-preconditioned conjugate gradients. Returns when the recurrence
// residual satisfies the relative criterion (caller re-verifies with the true
// residual), on breakdown, or after max_iter/stagnation.
IterOutcome jacobi_cg(const BandedSystem& A, std::vector<double>& x, double tol,
                      std::int64_t max_iter) {
  const std::int64_t n = A.size();
  const auto b = A.rhs();
  const double bnorm = nrm2(b);
  std::vector<double> invd = inverse_diag(A);
  std::vector<double> r(n), z(n), p(n), q(n);
  A.matvec(x, r);
  for (std::int64_t k = 0; k < n; ++k) r[k] = b[k] - r[k];
  for (std::int64_t k = 0; k < n; ++k) z[k] = invd[k] * r[k];
  p = z;
  double rz = dot(r, z);
  IterOutcome out;
  double best = nrm2(r) / bnorm;
  int stalled = 0;
  for (std::int64_t it = 1; it <= max_iter; ++it) {
    out.iterations = it;
    A.matvec(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      out.breakdown = true;
      return out;
    }
    const double alpha = rz / pq;
    for (std::int64_t k = 0; k < n; ++k) x[k] += alpha * p[k];
    for (std::int64_t k = 0; k < n; ++k) r[k] -= alpha * q[k];
    const double rel = nrm2(r) / bnorm;
    if (rel <= tol) return out;
    if (rel < 0.999 * best) {
      best = rel;
      stalled = 0;
    } else if (++stalled >= 200) {
      return out;  // flat for 200 iterations; let the caller fall back
    }
    for (std::int64_t k = 0; k < n; ++k) z[k] = invd[k] * r[k];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::int64_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  return out;
}

IterOutcome jacobi_bicgstab(const BandedSystem& A, std::vector<double>& x, double tol,
                            std::int64_t max_iter) {
  const std::int64_t n = A.size();
  const auto b = A.rhs();
  const double bnorm = nrm2(b);
  std::vector<double> invd = inverse_diag(A);
  std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n);
  A.matvec(x, r);
  for (std::int64_t k = 0; k < n; ++k) r[k] = b[k] - r[k];
  rhat = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  IterOutcome out;
  double best = nrm2(r) / bnorm;
  int stalled = 0;
  for (std::int64_t it = 1; it <= max_iter; ++it) {
    out.iterations = it;
    const double rho_next = dot(rhat, r);
    if (rho_next == 0.0) {
      out.breakdown = true;
      return out;
    }
    const double beta = (rho_next / rho) * (alpha / omega);
    rho = rho_next;
    for (std::int64_t k = 0; k < n; ++k) p[k] = r[k] + beta * (p[k] - omega * v[k]);
    for (std::int64_t k = 0; k < n; ++k) phat[k] = invd[k] * p[k];
    A.matvec(phat, v);
    const double rhat_v = dot(rhat, v);
    if (rhat_v == 0.0) {
      out.breakdown = true;
      return out;
    }
    alpha = rho / rhat_v;
    for (std::int64_t k = 0; k < n; ++k) s[k] = r[k] - alpha * v[k];
    if (nrm2(s) / bnorm <= tol) {
      for (std::int64_t k = 0; k < n; ++k) x[k] += alpha * phat[k];
      return out;
    }
    for (std::int64_t k = 0; k < n; ++k) shat[k] = invd[k] * s[k];
    A.matvec(shat, t);
    const double tt = dot(t, t);
    if (tt == 0.0) {
      out.breakdown = true;
      return out;
    }
    omega = dot(t, s) / tt;
    for (std::int64_t k = 0; k < n; ++k) x[k] += alpha * phat[k] + omega * shat[k];
    for (std::int64_t k = 0; k < n; ++k) r[k] = s[k] - omega * t[k];
    const double rel = nrm2(r) / bnorm;
    if (rel <= tol) return out;
    if (rel < 0.999 * best) {
      best = rel;
      stalled = 0;
    } else if (++stalled >= 200) {
      return out;
    }
    if (omega == 0.0) {
      out.breakdown = true;
      return out;
    }
  }
  return out;
}

std::int64_t band_width(const StaggeredGrid& g) {
  return g.dim() == 3 ? static_cast<std::int64_t>(g.cells(Axis::X)) * g.cells(Axis::Y)
                      : g.cells(Axis::X);
}

bool band_lu_feasible(const BandedSystem& sys) {
  const std::int64_t bw = band_width(sys.grid());
  return (3 * bw + 1) * sys.size() <= kBandLuMaxDoubles &&
         sys.size() <= std::numeric_limits<int>::max();
}

std::vector<double> band_lu(const BandedSystem& sys) {
  const int n = static_cast<int>(sys.size());
  const int kl = static_cast<int>(band_width(sys.grid()));
  const int ku = kl;
  const int ldab = 2 * kl + ku + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
  const GridShape s = shape_of(sys.grid());
  const bool has_z = sys.grid().dim() == 3;
  auto put = [&](std::int64_t i, std::int64_t j, double v) {
    if (j < 0 || j >= n) return;  // boundary-crossing band, value is zero
    ab[static_cast<std::size_t>(j) * ldab + (kl + ku + i - j)] = v;
  };
  const auto d = sys.diag();
  for (std::int64_t i = 0; i < n; ++i) {
    put(i, i, d[i]);
    put(i, i - 1, sys.band(Band::XLo)[i]);
    put(i, i + 1, sys.band(Band::XHi)[i]);
    put(i, i - s.sy, sys.band(Band::YLo)[i]);
    put(i, i + s.sy, sys.band(Band::YHi)[i]);
    if (has_z) {
      put(i, i - s.sz, sys.band(Band::ZLo)[i]);
      put(i, i + s.sz, sys.band(Band::ZHi)[i]);
    }
  }
  std::vector<double> x(sys.rhs().begin(), sys.rhs().end());
  std::vector<int> ipiv(n);
  const int nrhs = 1;
  int info = 0;
  dgbsv_(&n, &kl, &ku, &nrhs, ab.data(), &ldab, ipiv.data(), x.data(), &n, &info);
  if (info > 0) throw SolverError("band LU: matrix is singular at pivot " + std::to_string(info));
  if (info < 0) throw std::logic_error("band LU: invalid argument " + std::to_string(-info));
  return x;
}

}  // namespace

std::vector<double> solve_dense(const BandedSystem& sys) {
  const std::int64_t n = sys.size();
  if (n > kDenseLimit)
    throw std::invalid_argument("solve_dense: system too large (" + std::to_string(n) + " > " +
                                std::to_string(kDenseLimit) + ")");
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  const GridShape s = shape_of(sys.grid());
  const bool has_z = sys.grid().dim() == 3;
  auto put = [&](std::int64_t i, std::int64_t j, double v) {
    if (j >= 0 && j < n) a[static_cast<std::size_t>(i) * n + j] = v;
  };
  const auto d = sys.diag();
  for (std::int64_t i = 0; i < n; ++i) {
    put(i, i, d[i]);
    put(i, i - 1, sys.band(Band::XLo)[i]);
    put(i, i + 1, sys.band(Band::XHi)[i]);
    put(i, i - s.sy, sys.band(Band::YLo)[i]);
    put(i, i + s.sy, sys.band(Band::YHi)[i]);
    if (has_z) {
      put(i, i - s.sz, sys.band(Band::ZLo)[i]);
      put(i, i + s.sz, sys.band(Band::ZHi)[i]);
    }
  }
  std::vector<double> x(sys.rhs().begin(), sys.rhs().end());
  // Gaussian elimination with partial pivoting.
  for (std::int64_t col = 0; col < n; ++col) {
    std::int64_t piv = col;
    double mag = std::abs(a[col * n + col]);
    for (std::int64_t r = col + 1; r < n; ++r) {
      const double m = std::abs(a[r * n + col]);
      if (m > mag) {
        mag = m;
        piv = r;
      }
    }
    if (mag == 0.0) throw SolverError("solve_dense: singular matrix at column " + std::to_string(col));
    if (piv != col) {
      for (std::int64_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(x[piv], x[col]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::int64_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] * inv;
      if (f == 0.0) continue;
      a[r * n + col] = 0.0;
      for (std::int64_t c = col + 1; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      x[r] -= f * x[col];
    }
  }
  for (std::int64_t r = n - 1; r >= 0; --r) {
    double v = x[r];
    for (std::int64_t c = r + 1; c < n; ++c) v -= a[r * n + c] * x[c];
    x[r] = v / a[r * n + r];
  }
  return x;
}

std::vector<double> solve(const BandedSystem& sys, SolveReport& report, const SolverOptions& opts,
                          std::span<const double> x0) {
  const std::int64_t n = sys.size();
  const std::int64_t max_iter = opts.max_iter > 0 ? opts.max_iter : 10 * n;
  const double bnorm = sys.rhs_norm();
  report = SolveReport{};

  std::vector<double> x;
  if (x0.empty()) {
    x.assign(static_cast<std::size_t>(n), 0.0);
  } else {
    if (static_cast<std::int64_t>(x0.size()) != n)
      throw std::invalid_argument("solve: initial guess size mismatch");
    x.assign(x0.begin(), x0.end());
  }

  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    report.method = opts.method;
    report.rel_residual = 0.0;
    return x;
  }

  const double anorm = sys.inf_norm();
  auto accepted = [&](SolveMethod m, std::int64_t iters, bool fallback) -> bool {
    const double res = sys.residual_norm(x);
    report.method = m;
    report.iterations = iters;
    report.rel_residual = res / bnorm;
    report.backward_error = res / (anorm * nrm2(x) + bnorm);
    report.used_direct_fallback = fallback;
    if (report.rel_residual <= opts.tol) {
      report.criterion = ConvergenceCriterion::Relative;
      return true;
    }
    if (opts.accept_backward_error && report.backward_error <= opts.tol) {
      report.criterion = ConvergenceCriterion::BackwardError;
      return true;
    }
    return false;
  };

  auto fail = [&]() -> SolverError {
    return SolverError("solve: no path reached tol " + std::to_string(opts.tol) + " on " +
                       std::to_string(n) + " unknowns; best relative residual " +
                       std::to_string(report.rel_residual) + ", backward error " +
                       std::to_string(report.backward_error));
  };

  switch (opts.method) {
    case SolveMethod::DenseLU:
      x = solve_dense(sys);
      if (accepted(SolveMethod::DenseLU, 0, false)) return x;
      throw fail();
    case SolveMethod::BandLU:
      if (!band_lu_feasible(sys))
        throw std::invalid_argument("solve: banded factorization infeasible for this grid");
      x = band_lu(sys);
      if (accepted(SolveMethod::BandLU, 0, false)) return x;
      throw fail();
    default:
      break;
  }

  const SolveMethod krylov = opts.method == SolveMethod::Auto
                                 ? (sys.symmetric() ? SolveMethod::CG : SolveMethod::BiCGStab)
                                 : opts.method;
  const IterOutcome out = krylov == SolveMethod::CG ? jacobi_cg(sys, x, opts.tol, max_iter)
                                                    : jacobi_bicgstab(sys, x, opts.tol, max_iter);
  if (accepted(krylov, out.iterations, false)) return x;

  if (band_lu_feasible(sys)) {
    x = band_lu(sys);
    if (accepted(SolveMethod::BandLU, out.iterations, true)) return x;
  }
  throw fail();
}

std::vector<double> solve(const BandedSystem& sys, const SolverOptions& opts,
                          std::span<const double> x0) {
  SolveReport report;
  return solve(sys, report, opts, x0);
}

}  // namespace wormsim
