#include "wormsim/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "wormsim/errors.hpp"

namespace wormsim {

namespace {

std::string axis_name(Axis a) {
  switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    default: return "z";
  }
}

}  // namespace

StaggeredGrid::StaggeredGrid(int dim, std::array<int, 3> cells,
                             std::array<double, 3> lo, std::array<double, 3> hi)
    : dim_(dim), n_(cells), lo_(lo), hi_(hi) {
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("StaggeredGrid: dim must be 2 or 3, got " + std::to_string(dim));
  if (dim == 2) {
    n_[2] = 1;
    lo_[2] = hi_[2] = 0.0;
  }
  for (int a = 0; a < dim; ++a) {
    if (n_[a] < 1)
      throw std::invalid_argument("StaggeredGrid: need at least one cell along " +
                                  axis_name(static_cast<Axis>(a)));
    if (!(hi_[a] > lo_[a]))
      throw std::invalid_argument("StaggeredGrid: empty extent along " +
                                  axis_name(static_cast<Axis>(a)));
    h_[a] = (hi_[a] - lo_[a]) / n_[a];
  }
  if (dim == 2) h_[2] = 0.0;
}

StaggeredGrid StaggeredGrid::square(int n, double length) {
  return StaggeredGrid(2, {n, n, 1}, {0.0, 0.0, 0.0}, {length, length, 0.0});
}

StaggeredGrid StaggeredGrid::cube(int n, double length) {
  return StaggeredGrid(3, {n, n, n}, {0.0, 0.0, 0.0}, {length, length, length});
}

double StaggeredGrid::max_spacing() const {
  double h = 0.0;
  for (int a = 0; a < dim_; ++a) h = std::max(h, h_[a]);
  return h;
}

double StaggeredGrid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= h_[a];
  return v;
}

double StaggeredGrid::domain_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= hi_[a] - lo_[a];
  return v;
}

std::int64_t StaggeredGrid::cell_count() const {
  return static_cast<std::int64_t>(n_[0]) * n_[1] * n_[2];
}

std::int64_t StaggeredGrid::face_count(Axis a) const {
  require_axis(a);
  std::array<std::int64_t, 3> e{n_[0], n_[1], n_[2]};
  e[axis_index(a)] += 1;
  return e[0] * e[1] * e[2];
}

std::int64_t StaggeredGrid::cell_stride(Axis a) const {
  require_axis(a);
  switch (a) {
    case Axis::X: return 1;
    case Axis::Y: return n_[0];
    default: return static_cast<std::int64_t>(n_[0]) * n_[1];
  }
}

std::int64_t StaggeredGrid::cell_index(int i, int j, int l) const {
  return i + static_cast<std::int64_t>(n_[0]) * (j + static_cast<std::int64_t>(n_[1]) * l);
}

std::int64_t StaggeredGrid::face_index(Axis a, int i, int j, int l) const {
  const int ai = axis_index(a);
  std::array<std::int64_t, 3> e{n_[0], n_[1], n_[2]};
  e[ai] += 1;
  return i + e[0] * (j + e[1] * l);
}

void StaggeredGrid::require_axis(Axis a) const {
  if (axis_index(a) < 0 || axis_index(a) >= dim_)
    throw std::invalid_argument("axis " + axis_name(a) + " out of range for a " +
                                std::to_string(dim_) + "-D grid");
}

CellField::CellField(StaggeredGrid grid, double fill, FieldRole role)
    : grid_(std::move(grid)), v_(static_cast<std::size_t>(grid_.cell_count()), fill), role_(role) {}

void CellField::fill(double value) {
  for (double& x : v_) x = value;
}

bool CellField::all_finite() const {
  for (double x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

void CellField::validate() const {
  const int nx = grid_.cells(Axis::X);
  const int ny = grid_.cells(Axis::Y);
  const int nz = grid_.dim() == 3 ? grid_.cells(Axis::Z) : 1;
  for (int l = 0; l < nz; ++l)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double x = (*this)(i, j, l);
        const char* what = nullptr;
        if (!std::isfinite(x)) {
          what = "non-finite value";
        } else if (role_ == FieldRole::Porosity && !(x > 0.0 && x < 1.0)) {
          what = "porosity outside (0,1)";
        } else if (role_ == FieldRole::Concentration && !(x >= 0.0)) {
          what = "negative concentration";
        } else if (role_ == FieldRole::Temperature && !(x > 0.0)) {
          what = "nonpositive temperature";
        }
        if (what)
          throw InvariantError(std::string(what) + " at cell (" + std::to_string(i) + "," +
                               std::to_string(j) + "," + std::to_string(l) + "): " +
                               std::to_string(x));
      }
}

FaceField::FaceField(StaggeredGrid grid, double fill) : grid_(std::move(grid)) {
  for (int a = 0; a < grid_.dim(); ++a)
    comp_[a].assign(static_cast<std::size_t>(grid_.face_count(static_cast<Axis>(a))), fill);
}

std::span<double> FaceField::component(Axis a) {
  grid_.require_axis(a);
  return comp_[axis_index(a)];
}

std::span<const double> FaceField::component(Axis a) const {
  grid_.require_axis(a);
  return comp_[axis_index(a)];
}

void FaceField::fill(double value) {
  for (auto& c : comp_)
    for (double& x : c) x = value;
}

bool FaceField::all_finite() const {
  for (const auto& c : comp_)
    for (double x : c)
      if (!std::isfinite(x)) return false;
  return true;
}

double FaceField::max_abs_boundary() const {
  double worst = 0.0;
  const int nx = grid_.cells(Axis::X);
  const int ny = grid_.cells(Axis::Y);
  const int nz = grid_.dim() == 3 ? grid_.cells(Axis::Z) : 1;
  for (int a = 0; a < grid_.dim(); ++a) {
    const Axis ax = static_cast<Axis>(a);
    const int fn[3] = {a == 0 ? nx + 1 : nx, a == 1 ? ny + 1 : ny, a == 2 ? nz + 1 : nz};
    const int last[3] = {nx, ny, nz};
    for (int l = 0; l < fn[2]; ++l)
      for (int j = 0; j < fn[1]; ++j)
        for (int i = 0; i < fn[0]; ++i) {
          const int c[3] = {i, j, l};
          if (c[a] != 0 && c[a] != last[a]) continue;
          worst = std::max(worst, std::abs(at(ax, i, j, l)));
        }
  }
  return worst;
}

namespace {

void require_same_grid(const StaggeredGrid& a, const StaggeredGrid& b, const char* op) {
  if (!(a == b)) throw std::invalid_argument(std::string(op) + ": fields live on different grids");
}

}  // namespace

FaceField d_face(const CellField& f, Axis a) {
  const StaggeredGrid& g = f.grid();
  g.require_axis(a);
  FaceField out(g);
  const int ai = axis_index(a);
  const double inv_h = 1.0 / g.spacing(a);
  const int n[3] = {g.cells(Axis::X), g.cells(Axis::Y), g.dim() == 3 ? g.cells(Axis::Z) : 1};
  int fn[3] = {n[0], n[1], n[2]};
  fn[ai] += 1;
  int c[3];
  for (c[2] = 0; c[2] < fn[2]; ++c[2])
    for (c[1] = 0; c[1] < fn[1]; ++c[1])
      for (c[0] = 0; c[0] < fn[0]; ++c[0]) {
        if (c[ai] == 0 || c[ai] == n[ai]) continue;  // boundary faces stay zero
        int m[3] = {c[0], c[1], c[2]};
        m[ai] -= 1;
        out.at(a, c[0], c[1], c[2]) = (f(c[0], c[1], c[2]) - f(m[0], m[1], m[2])) * inv_h;
      }
  return out;
}

CellField D_cell(const FaceField& w, Axis a) {
  const StaggeredGrid& g = w.grid();
  g.require_axis(a);
  CellField out(g);
  const int ai = axis_index(a);
  const double inv_h = 1.0 / g.spacing(a);
  const int n[3] = {g.cells(Axis::X), g.cells(Axis::Y), g.dim() == 3 ? g.cells(Axis::Z) : 1};
  int c[3];
  for (c[2] = 0; c[2] < n[2]; ++c[2])
    for (c[1] = 0; c[1] < n[1]; ++c[1])
      for (c[0] = 0; c[0] < n[0]; ++c[0]) {
        int u[3] = {c[0], c[1], c[2]};
        u[ai] += 1;
        out(c[0], c[1], c[2]) =
            (w.at(a, u[0], u[1], u[2]) - w.at(a, c[0], c[1], c[2])) * inv_h;
      }
  return out;
}

CellField divergence(const FaceField& w) {
  const StaggeredGrid& g = w.grid();
  CellField out(g);
  for (int a = 0; a < g.dim(); ++a) {
    CellField part = D_cell(w, static_cast<Axis>(a));
    for (std::int64_t k = 0; k < out.size(); ++k) out[k] += part[k];
  }
  return out;
}

FaceField interp_face(const CellField& f, Axis a) {
  const StaggeredGrid& g = f.grid();
  g.require_axis(a);
  FaceField out(g);
  const int ai = axis_index(a);
  const int n[3] = {g.cells(Axis::X), g.cells(Axis::Y), g.dim() == 3 ? g.cells(Axis::Z) : 1};
  int fn[3] = {n[0], n[1], n[2]};
  fn[ai] += 1;
  int c[3];
  for (c[2] = 0; c[2] < fn[2]; ++c[2])
    for (c[1] = 0; c[1] < fn[1]; ++c[1])
      for (c[0] = 0; c[0] < fn[0]; ++c[0]) {
        int m[3] = {c[0], c[1], c[2]};
        double v;
        if (c[ai] == 0) {
          v = f(m[0], m[1], m[2]);  // copy the single adjacent cell
        } else if (c[ai] == n[ai]) {
          m[ai] -= 1;
          v = f(m[0], m[1], m[2]);
        } else {
          m[ai] -= 1;
          v = 0.5 * (f(c[0], c[1], c[2]) + f(m[0], m[1], m[2]));
        }
        out.at(a, c[0], c[1], c[2]) = v;
      }
  return out;
}

CellField dt_quotient(const CellField& f_new, const CellField& f_old, double dt) {
  require_same_grid(f_new.grid(), f_old.grid(), "dt_quotient");
  if (!(dt > 0.0)) throw std::invalid_argument("dt_quotient: dt must be positive");
  CellField out(f_new.grid());
  const double inv_dt = 1.0 / dt;
  for (std::int64_t k = 0; k < out.size(); ++k) out[k] = (f_new[k] - f_old[k]) * inv_dt;
  return out;
}

double inner_M(const CellField& f, const CellField& g) {
  require_same_grid(f.grid(), g.grid(), "inner_M");
  double s = 0.0;
  for (std::int64_t k = 0; k < f.size(); ++k) s += f[k] * g[k];
  return s * f.grid().cell_volume();
}

double inner_face(const FaceField& v, const FaceField& w, Axis a) {
  require_same_grid(v.grid(), w.grid(), "inner_face");
  const StaggeredGrid& g = v.grid();
  g.require_axis(a);
  const int ai = axis_index(a);
  const int n[3] = {g.cells(Axis::X), g.cells(Axis::Y), g.dim() == 3 ? g.cells(Axis::Z) : 1};
  int fn[3] = {n[0], n[1], n[2]};
  fn[ai] += 1;
  double s = 0.0;
  int c[3];
  for (c[2] = 0; c[2] < fn[2]; ++c[2])
    for (c[1] = 0; c[1] < fn[1]; ++c[1])
      for (c[0] = 0; c[0] < fn[0]; ++c[0]) {
        if (c[ai] == 0 || c[ai] == n[ai]) continue;  // interior faces only
        s += v.at(a, c[0], c[1], c[2]) * w.at(a, c[0], c[1], c[2]);
      }
  return s * g.cell_volume();
}

double inner_TM(const FaceField& v, const FaceField& w) {
  require_same_grid(v.grid(), w.grid(), "inner_TM");
  double s = 0.0;
  for (int a = 0; a < v.grid().dim(); ++a) s += inner_face(v, w, static_cast<Axis>(a));
  return s;
}

double norm_M(const CellField& f) { return std::sqrt(inner_M(f, f)); }

double norm_TM(const FaceField& v) { return std::sqrt(inner_TM(v, v)); }

}  // namespace wormsim
