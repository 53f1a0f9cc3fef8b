#pragma once

// Independent oracle for the first and second moments.  Because the
// generator is quadratic in (x, p), the Ehrenfest equations close on the
// means and the central second moments.  Taking traces against x, p, x^2,
// p^2 and {x,p} (cyclically, discarding boundary terms, i.e. in the
// untruncated algebra) gives
//
//   d<x>/dt   = <p>/M
//   d<p>/dt   = -M w^2 <x> - 2 gamma <p>
//   d vx/dt   = 2 c / M            + 2 D_qq
//   d vp/dt   = -2 M w^2 c - 4 gamma vp + 2 D_pp
//   d c/dt    = vp / M - M w^2 vx  - 2 gamma c
//
// with vx = var x, vp = var p, c = cov(x,p) = <{x,p}>/2 - <x><p>, and w the
// trap frequency (zero for a free particle).  This linear system is solved
// exactly through the matrix exponential, so the oracle carries no
// time-discretisation error of its own and any disagreement with the
// trajectory is attributable to the RK4 step or the basis truncation.

#include <span>
#include <optional>
#include <vector>

#include "cpqbm/coefficients.hpp"
#include "cpqbm/master_equation.hpp"

namespace cpqbm {

struct GaussianState {
  double mean_x = 0.0, mean_p = 0.0;
  double var_x = 0.0, var_p = 0.0, cov_xp = 0.0;
};

// Right-hand side of the moment system above.  Uses only (D_pp, D_qq, gamma)
// from the coefficient set; pass effective_coefficients() of a generator to
// mirror what the matrix evolution actually uses.
GaussianState moment_rhs(const GaussianState& s, const CoefficientSet& coeffs,
                         const HamiltonianSpec& ham, double mass);

// Exact propagation of the moment system to each requested time.
std::vector<GaussianState> propagate_moments(const GaussianState& s0,
                                             const CoefficientSet& coeffs,
                                             const HamiltonianSpec& ham,
                                             double mass,
                                             std::span<const double> times);

// Fixed point of the moment system.  Moments without a stationary value are
// left empty: a free particle has no stationary <x> or var x (plain
// diffusion), and nothing is stationary without friction.
struct StationaryResult {
  std::optional<double> mean_x, mean_p, var_x, var_p, cov_xp;
};

StationaryResult stationary_moments(const CoefficientSet& coeffs,
                                    const HamiltonianSpec& ham, double mass);

}  // namespace cpqbm
