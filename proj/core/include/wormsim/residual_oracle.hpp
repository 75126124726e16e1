#pragma once

// Independent check of the manufactured cases. Every derivative is recomputed
// with 6th-order central differences from the value evaluators alone, the
// continuous equations are assembled from those numerical derivatives, and
// the result has to cancel the case's own source terms to far below the gate
// tolerance. Nothing here reuses the hand-derived partials, so a sign or
// chain-rule slip in either the fields or the sources shows up as a residual.

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>

#include "wormsim/constitutive.hpp"
#include "wormsim/grid.hpp"
#include "wormsim/mms.hpp"

namespace wormsim::oracle {

using X3 = std::array<double, 3>;

inline constexpr double kDelta = 1.0 / 256.0;

template <class F>
double fd1(F&& f, double s) {
  const double d = kDelta;
  return (f(s + 3 * d) - 9.0 * f(s + 2 * d) + 45.0 * f(s + d) - 45.0 * f(s - d) +
          9.0 * f(s - 2 * d) - f(s - 3 * d)) /
         (60.0 * d);
}

inline X3 shifted(X3 x, int a, double s) {
  x[a] = s;
  return x;
}

class ResidualCheck {
 public:
  explicit ResidualCheck(const mms::ManufacturedCase& c)
      : case_(c),
        pp_(c.params()),
        phi0_(c.initial_porosity()),
        k0_(c.initial_permeability()) {}

  double p(const X3& x, double t) const { return case_.pressure(x, t).v; }
  double c(const X3& x, double t) const { return case_.concentration(x, t).v; }
  double T(const X3& x, double t) const { return case_.temperature(x, t).v; }
  double phi(const X3& x, double t) const { return case_.porosity(x, t).v; }

  // Velocity from values only: the permeability closure applied to the
  // pointwise porosity times a numerical pressure gradient.
  double u(int a, const X3& x, double t) const {
    const double K = permeability(phi(x, t), phi0_, k0_);
    const double dp = fd1([&](double s) { return p(shifted(x, a, s), t); }, x[a]);
    return -K / pp_.mu * dp;
  }

  double flow_residual(const X3& x, double t) const {
    double div_u = 0.0;
    for (int a = 0; a < case_.dim(); ++a) {
      div_u += fd1([&](double s) { return u(a, shifted(x, a, s), t); }, x[a]);
    }
    const double p_t = fd1([&](double s) { return p(x, s); }, t);
    const double phi_t = fd1([&](double s) { return phi(x, s); }, t);
    return pp_.gamma * p_t + phi_t + div_u - case_.pressure_source(x, t);
  }

  double solute_residual(const X3& x, double t) const {
    const double storage = fd1([&](double s) { return phi(x, s) * c(x, s); }, t);
    double conv = 0.0;
    double diff = 0.0;
    for (int a = 0; a < case_.dim(); ++a) {
      conv += fd1(
          [&](double s) {
            const X3 y = shifted(x, a, s);
            return u(a, y, t) * c(y, t);
          },
          x[a]);
      diff += pp_.diffusivity[a] *
              fd1(
                  [&](double s) {
                    const X3 y = shifted(x, a, s);
                    return phi(y, t) * fd1([&](double r) { return c(shifted(y, a, r), t); }, s);
                  },
                  x[a]);
    }
    const double sink = interfacial_area(phi(x, t), phi0_, pp_.a0) *
                        reaction_rate(c(x, t), T(x, t), pp_);
    return storage + conv - diff + sink - case_.concentration_source(x, t);
  }

  double porosity_residual(const X3& x, double t) const {
    const double phi_t = fd1([&](double s) { return phi(x, s); }, t);
    const double gain = pp_.alpha / pp_.rho_s *
                        interfacial_area(phi(x, t), phi0_, pp_.a0) *
                        reaction_rate(c(x, t), T(x, t), pp_);
    return phi_t - gain - case_.porosity_source(x, t);
  }

  double heat_residual(const X3& x, double t) const {
    const double storage = fd1(
        [&](double s) { return volumetric_heat_capacity(phi(x, s), pp_) * T(x, s); }, t);
    double conv = 0.0;
    double cond = 0.0;
    for (int a = 0; a < case_.dim(); ++a) {
      conv += fd1(
          [&](double s) {
            const X3 y = shifted(x, a, s);
            return u(a, y, t) * T(y, t);
          },
          x[a]);
      cond += fd1(
          [&](double s) {
            const X3 y = shifted(x, a, s);
            return thermal_conductivity(phi(y, t), pp_) *
                   fd1([&](double r) { return T(shifted(y, a, r), t); }, s);
          },
          x[a]);
    }
    const double heat = interfacial_area(phi(x, t), phi0_, pp_.a0) *
                        reaction_heat(T(x, t)) *
                        reaction_rate(c(x, t), T(x, t), pp_);
    return storage + pp_.rho_f * pp_.theta_f * conv - cond - heat -
           case_.temperature_source(x, t);
  }

  double velocity_mismatch(const X3& x, double t) const {
    double worst = 0.0;
    for (int a = 0; a < case_.dim(); ++a) {
      worst = std::max(worst, std::abs(u(a, x, t) - case_.velocity(static_cast<Axis>(a), x, t)));
    }
    return worst;
  }

 private:
  const mms::ManufacturedCase& case_;
  PhysParams pp_;
  double phi0_;
  double k0_;
};

struct ResidualMaxima {
  double flow = 0.0;
  double solute = 0.0;
  double porosity = 0.0;
  double heat = 0.0;
  double velocity = 0.0;

  double worst() const { return std::max({flow, solute, porosity, heat, velocity}); }
};

// Scans a uniform grid of per_axis^dim interior sample points for each given
// time and keeps the largest magnitude of every residual.
inline ResidualMaxima scan_residuals(const mms::ManufacturedCase& mc, int per_axis,
                                     std::initializer_list<double> times) {
  const ResidualCheck check(mc);
  ResidualMaxima m;
  const int nz = mc.dim() == 3 ? per_axis : 1;
  for (const double t : times) {
    for (int l = 0; l < nz; ++l) {
      for (int j = 0; j < per_axis; ++j) {
        for (int i = 0; i < per_axis; ++i) {
          const X3 x{(i + 0.5) / per_axis, (j + 0.5) / per_axis,
                     mc.dim() == 3 ? (l + 0.5) / per_axis : 0.0};
          m.flow = std::max(m.flow, std::abs(check.flow_residual(x, t)));
          m.solute = std::max(m.solute, std::abs(check.solute_residual(x, t)));
          m.porosity = std::max(m.porosity, std::abs(check.porosity_residual(x, t)));
          m.heat = std::max(m.heat, std::abs(check.heat_residual(x, t)));
          m.velocity = std::max(m.velocity, check.velocity_mismatch(x, t));
        }
      }
    }
  }
  return m;
}

}  // namespace wormsim::oracle
