#pragma once

#include <string>
#include <vector>

namespace wormsim {

// One consistency check: the worst deviation seen and the bound it must stay
// under. These are the identities the discretization is built on, so a
// failure means the build is miscompiled or a change broke an operator.
struct SelfCheck {
  std::string name;
  double worst = 0.0;
  double limit = 0.0;

  bool pass() const { return worst <= limit; }
};

// Runs the built-in consistency suite: the summation-by-parts adjoint
// identity between face differences and cell divergences (2-D and 3-D), the
// two closed forms of the interfacial area and of the reaction rate, and the
// finite-difference residual oracle over both manufactured cases.
std::vector<SelfCheck> run_self_checks();

}  // namespace wormsim
