#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace wormsim {

enum class Axis : int { X = 0, Y = 1, Z = 2 };

inline constexpr int axis_index(Axis a) { return static_cast<int>(a); }

// Uniform staggered (MAC) grid on an axis-aligned box, 2-D or 3-D.
// Scalar unknowns live at cell centers lo + (i+1/2)h, flux components at the
// faces lo + i*h normal to their axis. Indices are zero-based; linear cell
// storage is contiguous with x fastest, then y, then z.
class StaggeredGrid {
 public:
  StaggeredGrid() = default;
  StaggeredGrid(int dim, std::array<int, 3> cells, std::array<double, 3> lo,
                std::array<double, 3> hi);

  static StaggeredGrid square(int n, double length = 1.0);
  static StaggeredGrid cube(int n, double length = 1.0);

  int dim() const { return dim_; }
  int cells(Axis a) const { return n_[axis_index(a)]; }
  double lo(Axis a) const { return lo_[axis_index(a)]; }
  double hi(Axis a) const { return hi_[axis_index(a)]; }
  double spacing(Axis a) const { return h_[axis_index(a)]; }
  double max_spacing() const;

  double cell_volume() const;    // h_x*h_y (2-D) or h_x*h_y*h_z (3-D)
  double domain_volume() const;

  std::int64_t cell_count() const;
  std::int64_t face_count(Axis a) const;  // (n_a + 1) * product of the others

  double center(Axis a, int i) const { return lo(a) + (i + 0.5) * spacing(a); }
  double face(Axis a, int i) const { return lo(a) + i * spacing(a); }

  // Strides of the linear cell index: x -> 1, y -> nx, z -> nx*ny.
  std::int64_t cell_stride(Axis a) const;
  std::int64_t cell_index(int i, int j, int l = 0) const;
  std::int64_t face_index(Axis a, int i, int j, int l = 0) const;

  // Throws std::invalid_argument for an axis outside the grid dimension.
  void require_axis(Axis a) const;

  bool operator==(const StaggeredGrid&) const = default;

 private:
  int dim_ = 0;
  std::array<int, 3> n_{0, 0, 0};
  std::array<double, 3> lo_{0.0, 0.0, 0.0};
  std::array<double, 3> hi_{0.0, 0.0, 0.0};
  std::array<double, 3> h_{0.0, 0.0, 0.0};
};

enum class FieldRole { Generic, Pressure, Concentration, Temperature, Porosity };

// Scalar field sampled at cell centers.
class CellField {
 public:
  CellField() = default;
  explicit CellField(StaggeredGrid grid, double fill = 0.0,
                     FieldRole role = FieldRole::Generic);

  const StaggeredGrid& grid() const { return grid_; }
  FieldRole role() const { return role_; }
  void set_role(FieldRole role) { role_ = role; }

  std::int64_t size() const { return static_cast<std::int64_t>(v_.size()); }

  double& operator()(int i, int j, int l = 0) { return v_[grid_.cell_index(i, j, l)]; }
  double operator()(int i, int j, int l = 0) const { return v_[grid_.cell_index(i, j, l)]; }
  double& operator[](std::int64_t k) { return v_[k]; }
  double operator[](std::int64_t k) const { return v_[k]; }

  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }

  void fill(double value);
  bool all_finite() const;

  // Role-specific range checks; porosity must lie strictly inside (0,1).
  // Throws InvariantError naming the first offending cell.
  void validate() const;

 private:
  StaggeredGrid grid_;
  std::vector<double> v_;
  FieldRole role_ = FieldRole::Generic;
};

// Vector field with one component per axis, sampled at the faces normal to
// that axis (the MAC layout used for U, W and V).
class FaceField {
 public:
  FaceField() = default;
  explicit FaceField(StaggeredGrid grid, double fill = 0.0);

  const StaggeredGrid& grid() const { return grid_; }

  double& at(Axis a, int i, int j, int l = 0) {
    return comp_[axis_index(a)][grid_.face_index(a, i, j, l)];
  }
  double at(Axis a, int i, int j, int l = 0) const {
    return comp_[axis_index(a)][grid_.face_index(a, i, j, l)];
  }

  std::span<double> component(Axis a);
  std::span<const double> component(Axis a) const;

  void fill(double value);
  bool all_finite() const;

  // Largest |value| on the boundary faces of every axis; flux fields must
  // report exactly zero here.
  double max_abs_boundary() const;

 private:
  StaggeredGrid grid_;
  std::array<std::vector<double>, 3> comp_;
};

// Discrete difference and averaging operators. d_face and interp_face write
// only the component for the requested axis; d_face leaves boundary faces at
// zero (boundary values are the caller's flux policy, not the operator's).
FaceField d_face(const CellField& f, Axis a);
CellField D_cell(const FaceField& w, Axis a);
CellField divergence(const FaceField& w);  // sum of D_cell over all axes
FaceField interp_face(const CellField& f, Axis a);
CellField dt_quotient(const CellField& f_new, const CellField& f_old, double dt);

// Discrete inner products. inner_M weights cell pairs by the cell volume;
// inner_face sums the given axis component over interior faces only, so a
// pairing with a zero-boundary flux field satisfies the summation-by-parts
// identity inner_M(q, D_cell(w)) == -inner_face(d_face(q), w).
double inner_M(const CellField& f, const CellField& g);
double inner_face(const FaceField& v, const FaceField& w, Axis a);
double inner_TM(const FaceField& v, const FaceField& w);
double norm_M(const CellField& f);
double norm_TM(const FaceField& v);

}  // namespace wormsim
